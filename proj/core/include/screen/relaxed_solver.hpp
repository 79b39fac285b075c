#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "screen/energy.hpp"
#include "screen/geometry.hpp"
#include "screen/grid.hpp"

namespace screen {

enum class Algorithm { projected_gradient, obstacle_pgs, both };

std::string_view to_string(Algorithm a);

struct SolveConfig {
    double step_tau = 0.4;
    int max_iters = 4000;
    /// Sweep limit of the obstacle solver.
    int max_sweeps = 20000;
    /// Stopping tolerance; a value <= 0 means 1e-8 * |omega_plus|.
    double tol_residual = 0.0;
    double sor_omega = 1.7;
    /// Phase threshold theta = kappa + factor * h^2 * max(phi).
    double phase_threshold_factor = 0.02;
    Algorithm algorithm = Algorithm::projected_gradient;
    /// Solve on successively halved grids first and prolongate (0 disables).
    int coarse_levels = 2;
    /// Called after every accepted projected-gradient step with (iteration, energy, change, tau).
    std::function<void(int, double, double, double)> on_step;

    double tolerance_for(double m) const { return tol_residual > 0.0 ? tol_residual : 1e-8 * m; }
};

/// Relaxed negative charge density: 0 <= u <= 1 - u_plus cellwise, mass <= lambda_cap.
struct ChargeDensity {
    ScalarField field;
    double mass = 0.0;
    std::optional<double> lambda_cap;
    std::shared_ptr<const ScalarField> omega_plus_mask;
};

struct RelaxedSolution {
    ChargeDensity density;
    ScalarField phi;
    EnergyReport energy;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // last L-infinity change of u
    double multiplier = 0.0;  // active mass-cap shift (0 when the cap is slack)
    double final_tau = 0.0;
};

/// Minimises the Coulomb energy of u_plus - u over relaxed densities of mass <= lambda by
/// projected gradient u <- P(u + 2 tau phi(u)), where P clips to [0, 1 - u_plus] and, when the
/// mass exceeds lambda, shifts by the Lagrange constant found by bisection. tau is halved
/// on energy increase (failure below 1e-6); accepted steps set the next tau by Barzilai-Borwein.
RelaxedSolution solve_relaxed(const ScalarField& omega_plus, double lambda, const SolveConfig& cfg,
                              const ScalarField* initial_guess = nullptr);

/// Projection used by the solver, exposed for testing: clip v to [0, cap], then enforce
/// mass <= lambda by a uniform downward shift. Returns the shift.
double project_admissible(std::span<double> v, std::span<const double> cap, double cell_volume, double lambda);

/// Same with per-cell volumes (the projection in the volume-weighted inner product).
double project_admissible(std::span<double> v, std::span<const double> cap, std::span<const double> volumes,
                          double lambda);

struct ObstacleSolution {
    ScalarField phi;
    bool converged = false;
    int sweeps = 0;
    double residual = 0.0;  // last max update
};

/// Projected SOR on the 7-point Laplacian with phi = 0 on the box boundary: plain SOR for
/// -Lap phi = u_plus in full positive cells, and the complementarity
/// min(phi, -Lap phi - (u_plus - (1 - u_plus))) = 0 elsewhere. Converged when the largest
/// update of a sweep is <= tol * h^2. With cfg.coarse_levels > 0 the sweeps start from the
/// interpolated solution on a grid of twice the spacing.
ObstacleSolution solve_obstacle(const ScalarField& omega_plus, const GridSpec& grid, const SolveConfig& cfg);

/// Negative-charge density implied by an obstacle potential: u = u_plus + Lap_h phi, clipped to [0, 1 - u_plus].
ScalarField implied_density(const ScalarField& phi, const ScalarField& omega_plus);

/// Default phase threshold kappa + factor * h^2 * max(phi). kappa is the level of phi on the
/// free boundary: the multiplier of an active mass cap, 0 otherwise.
double default_phase_threshold(const ScalarField& phi, const SolveConfig& cfg, double kappa = 0.0);

/// Binary mask of {phi > theta} minus cells that are mostly positive charge (u_plus >= 1/2).
ScalarField extract_negative_phase(const ScalarField& phi, const ScalarField& omega_plus_mask, double theta);

struct EnergyCurvePoint {
    double lambda;
    double energy;
    double mass;
    bool converged;
};

/// e(lambda) at each (ascending) lambda, warm-starting from the previous density.
std::vector<EnergyCurvePoint> energy_curve(const ScalarField& omega_plus, const std::vector<double>& lambdas,
                                           const SolveConfig& cfg);

enum class BoxPolicy { working, suggested };

struct DomainSolveOptions {
    double h = 1.0 / 32.0;
    /// Mass cap; nullopt means lambda = m, the integral of the rasterized omega_plus.
    std::optional<double> lambda;
    BoxPolicy box = BoxPolicy::working;
    /// working box: hull inflated by reach * |omega_plus|^(1/3).
    double reach = 0.3;
    /// suggested box: extra margin as a fraction of |omega_plus|^(1/3).
    double margin = 0.2;
    /// Times the working box may grow by 1.5x in reach when the support certificate fails.
    int max_box_growth = 3;
    int subsamples = 4;
    /// Outer cell layers that must stay uncharged.
    int certificate_layers = 2;
};

/// One solve of a domain on a grid built from the options, with the extracted phase.
struct DomainSolution {
    GridSpec grid;
    ScalarField omega_plus;
    double m = 0.0;
    double lambda = 0.0;
    std::optional<RelaxedSolution> relaxed;
    std::optional<ObstacleSolution> obstacle;
    /// Primary potential and density: the relaxed ones when that solver ran.
    ScalarField phi;
    ScalarField density;
    double kappa = 0.0;
    double theta = 0.0;
    ScalarField omega_minus;
    bool converged = false;
    bool support_certified = false;
    int box_growths = 0;
};

/// Rasterizes omega_plus, runs cfg.algorithm and checks that no charge (relaxed) or potential
/// (obstacle) reaches the outer certificate layers; the working box is enlarged until it
/// does or the growth budget is spent. With Algorithm::both the relaxed solve starts from the
/// density implied by the obstacle potential.
DomainSolution solve_domain(const DomainSpec& omega_plus, const DomainSolveOptions& opt, const SolveConfig& cfg);

/// Largest |value| on the outer `layers` cell layers of the box.
double boundary_layer_max(const ScalarField& f, int layers);

}  // namespace screen
