#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "screen/grid.hpp"

namespace screen {

/// Axis-aligned box [lo, hi].
struct Box {
    Vec3 lo;
    Vec3 hi;

    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    bool contains(const Box& other) const;
    Box inflated(double by) const;
};

class DomainSpec;

struct Ball {
    Vec3 center;
    double radius = 0.0;
};

/// Open shell r_inner < |x - center| < r_outer.
struct Annulus {
    Vec3 center;
    double r_inner = 0.0;
    double r_outer = 0.0;
};

struct UnionOf {
    std::vector<DomainSpec> parts;
};

/// Binary occupancy on a grid; values must be 0 or 1.
struct VoxelMask {
    ScalarField field;
};

/// Description of a charged region: analytic shapes, unions of them, or a voxel mask.
class DomainSpec {
public:
    using Variant = std::variant<Ball, Annulus, UnionOf, VoxelMask>;

    DomainSpec() : shape_(UnionOf{}) {}
    // Validating constructors; throw PreconditionError on bad radii or non-binary masks.
    static DomainSpec ball(Vec3 center, double radius);
    static DomainSpec annulus(Vec3 center, double r_inner, double r_outer);
    static DomainSpec union_of(std::vector<DomainSpec> parts);
    static DomainSpec voxels(ScalarField mask);

    const Variant& shape() const { return shape_; }

    bool is_analytic() const;
    /// True when the domain has zero volume and no parts (empty union, all-zero mask).
    bool empty() const;

    /// Exact for balls, annuli, and unions of pairwise-disjoint analytic parts; voxel
    /// masks return their integral. Overlapping unions fall back to a fine stratified estimate.
    double volume() const;
    bool contains(Vec3 p) const;
    /// Negative inside. Exact outside every variant; for unions the inside value is the
    /// deepest component's depth, which bounds the true depth from below.
    double signed_distance(Vec3 p) const;
    /// Bounding box of the occupied region; nullopt for empty domains.
    std::optional<Box> bounds() const;
    /// Largest pairwise distance between points of the domain (analytic variants exact up to
    /// unions, where it is computed from the component spheres).
    double diameter() const;

    /// Flattened list of analytic leaves (balls and annuli); voxel masks are skipped.
    std::vector<DomainSpec> leaves() const;

private:
    explicit DomainSpec(Variant v) : shape_(std::move(v)) {}
    Variant shape_;
};

/// Per-cell volume fractions from subsamples^3 stratified samples (analytic) or a copy
/// (voxel masks, which must live on the same grid). Throws DomainError when the domain
/// leaves the grid box.
ScalarField rasterize(const DomainSpec& domain, const GridSpec& grid, int subsamples = 4);

/// Box containing the hull of omega_plus inflated by 2|omega_plus|^(1/3) + margin,
/// which encloses every point the negative phase can reach.
Box suggested_box(const DomainSpec& omega_plus, double margin = 0.0);

/// Hull of omega_plus inflated by reach * |omega_plus|^(1/3). The solvers start here and
/// grow toward suggested_box when the support certificate fails.
Box working_box(const DomainSpec& omega_plus, double reach);

/// Cell-centred grid with spacing h covering box, centred on it. With fft_friendly the
/// dims are rounded up to 2^a 3^b 5^c 7^d.
GridSpec grid_for_box(const Box& box, double h, bool fft_friendly = true);

struct Labeling {
    std::vector<int> labels;  // 0 = background, components 1..count
    int count = 0;
};

/// 6-connected components of {mask > 1/2}, labelled in lexicographic scan order.
Labeling connected_components(const ScalarField& mask);

/// Binary {field > threshold}.
ScalarField threshold_mask(const ScalarField& field, double threshold);

/// n quasi-uniform unit vectors on the sphere (Fibonacci lattice), deterministic.
std::vector<Vec3> fibonacci_sphere(int n);

}  // namespace screen
