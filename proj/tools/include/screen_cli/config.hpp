#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "screen/geometry.hpp"
#include "screen/relaxed_solver.hpp"
#include "screen/surface_charge.hpp"

namespace screen::cli {

/// Invalid configuration; the message starts with "line L, column C" or a JSON pointer.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputSet {
    bool json_report = true;
    bool csv_radial = false;
    bool vtk_fields = false;
};

struct DiagnosticsConfig {
    int exclusion_shells = 3;
    /// Flux sphere radii around the centre of omega_plus; empty picks one enclosing radius.
    std::vector<double> flux_radii;
    std::vector<Vec3> min_diam_points;
    /// Radii of the min-diam balls in units of h.
    std::vector<double> min_diam_radii = {2, 3, 4, 6, 8};
};

struct SurfaceConfig {
    int nodes = 2000;
    SelfInteraction self = SelfInteraction::consistent;
    /// Exterior match radii as multiples of the bounding radius of omega_plus.
    std::vector<double> match_factors = {1.5, 2.0, 4.0};
    int samples = 256;
};

struct SweepConfig {
    /// Mass caps; `lambda_fractions` in the file are multiplied by m.
    std::vector<double> lambdas;
    bool lambdas_are_fractions = false;
    std::vector<double> epsilons;
    int radial_cells = 400;
    bool has_lambdas = false;
    bool has_epsilons = false;
};

struct RunConfig {
    DomainSpec problem;
    nlohmann::json problem_json;
    std::optional<double> lambda;  // nullopt: "auto", lambda = m
    DomainSolveOptions grid;
    SolveConfig solver;
    OutputSet outputs;
    std::int64_t seed = 0;
    DiagnosticsConfig diagnostics;
    SurfaceConfig surface;
    SweepConfig sweep;
};

/// Parses and validates a configuration document. Unknown keys are rejected.
RunConfig parse_run_config(const std::string& text);

/// Reads and parses a file; I/O failures raise ConfigError too.
RunConfig load_run_config(const std::string& path);

/// Parses a domain description ({"type": "ball" | "annulus" | "union", ...}); `where` is the
/// JSON pointer used in error messages.
DomainSpec parse_domain(const nlohmann::json& j, const std::string& where);

std::string to_string(SelfInteraction s);

}  // namespace screen::cli
