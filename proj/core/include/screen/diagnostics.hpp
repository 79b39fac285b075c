#pragma once

#include <utility>
#include <vector>

#include "screen/geometry.hpp"
#include "screen/grid.hpp"
#include "screen/relaxed_solver.hpp"

namespace screen {

struct SupportBounds {
    double max_distance = -1.0;     // max over negative-phase cells of the distance to omega_plus
    double distance_bound = 0.0;    // 2 |omega_plus|^(1/3)
    double diameter_ratio = -1.0;   // diam(omega_minus) / diam(omega_plus)
    double diameter_bound = 0.0;    // 1 + 2 sqrt(3)
    int touching_components = 0;    // components within 2h of omega_plus
    int components = 0;
    double gap_omega0 = -1.0;       // min distance from uncharged cells not cut by the boundary of omega_plus to it
    bool empty = true;
};

struct FluxCheck {
    double radius = 0.0;
    double measured = 0.0;
    double expected = 0.0;
    double error = 0.0;
};

struct MinDiamSample {
    double radius = 0.0;
    double ratio = 0.0;
    int cells = 0;
};

struct DiagnosticsReport {
    double neutrality_error = 0.0;
    double screening_residual = 0.0;
    double min_phi = 0.0;
    double max_phi = 0.0;
    SupportBounds support;
    std::vector<FluxCheck> flux;
    Vec3 min_diam_point;
    std::vector<MinDiamSample> min_diam;
};

/// max |phi| over cells farther than exclusion_shells * h (centre to centre) from both masks,
/// divided by max phi. 0 when max phi <= 0.
double verify_screening(const ScalarField& phi, const ScalarField& omega_plus_mask, const ScalarField& omega_minus_mask,
                        int exclusion_shells = 3);

/// |mass(u) - m| / m.
double verify_neutrality(const ChargeDensity& u, double m);

/// Support and structure bounds for a binary negative-phase mask and an analytic omega_plus.
/// Cells whose centre is inside omega_plus are ignored in the mask.
SupportBounds verify_support_bounds(const ScalarField& omega_minus_mask, const DomainSpec& omega_plus);

/// Sphere integral of phi against lambda * R: |integral - expected| / (|expected| + m R).
FluxCheck verify_flux(const ScalarField& phi, Vec3 center, double radius, double expected_lambda_r, double m);

/// Exact sphere integral of the potential of the cell charges w by the shell theorem:
/// R Q(<R) + R^2 sum_{|y|>R} w h^3 / |y|, cells assigned by their centres.
double expected_sphere_integral(const ScalarField& w, Vec3 center, double radius);

/// The 16 fixed directions of the min-diam indicator: the 3 axes, 6 icosahedral vertex axes,
/// 4 cube diagonals and 3 face diagonals.
const std::vector<Vec3>& min_diam_directions();

/// For each r: the smallest width over the fixed directions of {phi <= theta} within B_r(x0)
/// (cell centres), divided by r. An empty set has width 0.
std::vector<MinDiamSample> min_diam_indicator(const ScalarField& phi, Vec3 x0, const std::vector<double>& radii,
                                              double theta);

/// Ratio at the smallest radius whose set holds at least min_cells cells (the smallest
/// resolvable radius); the sample is returned, or a sample with cells = 0 when none qualifies.
MinDiamSample smallest_resolvable(const std::vector<MinDiamSample>& samples, int min_cells = 4);

/// Heuristic: singular-like when the ratio at the smallest resolvable radius is below 0.2.
bool singular_like(const std::vector<MinDiamSample>& samples, int min_cells = 4);

struct InterfaceRadii {
    std::vector<double> radii;  // mean crossing radius, innermost first
    double spread = 0.0;        // largest deviation of a single ray from the mean
    bool consistent = false;    // every ray saw the same number of crossings
};

/// Radii where the trilinear interpolant of field crosses level along Fibonacci rays from
/// center, marched with step h/4 up to r_max.
InterfaceRadii interface_radii(const ScalarField& field, Vec3 center, double level, double r_max, int rays = 64);

/// Cells within distance (centre to centre) <= shells * h of {mask > 1/2}.
ScalarField dilate(const ScalarField& mask, double shells);

/// {u > 1/2 cap} outside omega_plus, with cap = 1 - u_plus: the cells mostly filled with negative charge.
ScalarField density_phase(const ScalarField& u, const ScalarField& omega_plus);

/// Symmetric difference volume of two binary masks.
double symmetric_difference(const ScalarField& a, const ScalarField& b);

}  // namespace screen
