#pragma once

#include <stdexcept>
#include <string>

namespace screen {

// Violated operation precondition (bad radii, ordering, unsorted input, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Geometry does not fit the computational box, or a query leaves it.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A request exceeds a configured size cap or an allocation failed.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unsupported input variant (e.g. voxel boundaries for surface sampling).
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace screen
