#pragma once

#include <utility>
#include <vector>

#include "screen/geometry.hpp"

namespace screen {

/// Concentric shell r_inner < |x| < r_outer carrying density sign * 1.
struct RadialShell {
    double r_inner = 0.0;
    double r_outer = 0.0;
    int sign = 1;
};

/// Sorted, non-overlapping concentric shells (validated on construction).
class RadialConfig {
public:
    RadialConfig() = default;
    explicit RadialConfig(std::vector<RadialShell> shells);

    const std::vector<RadialShell>& shells() const { return shells_; }
    /// Signed enclosed charge Q(r).
    double enclosed_charge(double r) const;
    double outer_radius() const;
    /// Total volume of the shells with the given sign.
    double volume(int sign) const;

private:
    std::vector<RadialShell> shells_;
};

/// The root R* > 1 of 2(R^2 - 1) - (2(R^3 - 1))^(2/3) = 0 (bisection on (1, 4), computed once).
double critical_ratio();
double critical_ratio_residual(double R);

/// Radii (r1, r2) of the optimal two-sided layer C(r1, R1) u C(R2, r2) around the annulus
/// C(R1, R2) when R2 / R1 < R*. Throws DomainError at or above R*.
std::pair<double, double> optimal_bilayer(double R1, double R2);

/// Outer radius cbrt(2 (R2^3 - R1^3)) of the filled-core minimiser B(R1) u C(R2, r); valid for
/// R1 = 0 or R2 / R1 >= R*.
double optimal_outer_only(double R1, double R2);

/// Optimal configuration for the annulus C(R1, R2) (R1 = 0 for a ball) with the branch chosen by R*.
RadialConfig optimal_configuration(double R1, double R2);

/// E of a concentric configuration: shell self energies plus signed pairwise interactions.
double total_energy_closed_form(const RadialConfig& config);

/// phi(r) of a configuration by radial quadrature of its enclosed charge.
double config_potential(const RadialConfig& config, double r);

/// Two balls of radius R centred at +-(d/2) e1 and the predicted negative phase, the union of
/// their separate optimal annuli. Requires d >= 2 cbrt(2) R.
std::pair<DomainSpec, DomainSpec> two_ball_configuration(double R, double d);

struct RadialSolveOptions {
    /// Upper bound of the negative density (1 / eps for the scaled problem).
    double density_cap = 1.0;
    double step_tau = 0.4;
    int max_iters = 200000;
    /// <= 0 means 1e-8 * m.
    double tol_residual = 0.0;
};

/// Piecewise-constant radial densities on nr equal shells of [0, rmax].
struct RadialProfile {
    std::vector<double> edges;        // nr + 1 radii
    std::vector<double> omega_plus;   // positive volume fraction per shell
    std::vector<double> u;            // negative density per shell
    std::vector<double> potential;    // shell average of phi
    double density_cap = 1.0;
    double mass = 0.0;
    double energy = 0.0;         // E
    double limit_energy = 0.0;   // E minus the self energy of omega_plus
    double multiplier = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient for the rotationally symmetric relaxed problem; shell potentials are
/// evaluated exactly from the shell closed forms with cumulative sums (O(nr) per step).
RadialProfile radial_relaxed_solve(const RadialConfig& omega_plus_shells, double lambda, int nr, double rmax,
                                   const RadialSolveOptions& opts = {});

/// Intervals of the negative phase of a radial profile. At an end that touches omega_plus the
/// radius follows the positive volume fraction; the free end is placed by volume.
std::vector<std::pair<double, double>> negative_shells(const RadialProfile& profile);

}  // namespace screen
