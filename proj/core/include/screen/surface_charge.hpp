#pragma once

#include <vector>

#include "screen/energy.hpp"
#include "screen/geometry.hpp"
#include "screen/relaxed_solver.hpp"

namespace screen {

/// n Fibonacci nodes per boundary sphere with equal area weights 4 pi R^2 / n (annuli give
/// both spheres, unions every leaf). Masses are left at zero. Voxel masks are unsupported.
SurfaceMeasure discretize_boundary(const DomainSpec& omega_plus, int n);

/// How a node interacts with its own mass in I(mu).
enum class SelfInteraction {
    excluded,    // i != j sums only (indefinite; evaluation only)
    disk_patch,  // plus the self energy of a uniformly charged flat disk of the node's area
    consistent,  // diagonal chosen so a constant density on each sphere has its exact potential
};

struct SurfaceSolution {
    SurfaceMeasure measure;
    double energy = 0.0;        // F(mu) = -2 I(mu_plus, mu) + I(mu), with the chosen self term
    double level = 0.0;         // mean of phi_mu_plus - phi_mu over charged nodes (alpha)
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimises F over nonnegative node masses summing to m = |omega_plus| by projected gradient
/// with the exact (sort-based) simplex projection, Barzilai-Borwein steps and backtracking.
/// Uses cfg.max_iters and cfg.tol_residual (<= 0: 1e-8 times the largest phi_mu_plus on the nodes).
/// A non-null start must be nonnegative with one entry per node; it is projected onto the simplex.
SurfaceSolution solve_surface_measure(const DomainSpec& omega_plus, int n, const SolveConfig& cfg,
                                      SelfInteraction self = SelfInteraction::consistent,
                                      const std::vector<double>* start = nullptr);

/// Euclidean projection of v onto {x >= 0, sum x = total}.
void project_simplex(std::vector<double>& v, double total);

/// Potential of the point masses at x.
double measure_potential(const SurfaceMeasure& mu, Vec3 x);

/// max |phi_mu - phi_mu_plus| / phi_mu_plus(c + radius e) over Fibonacci directions e around c.
double exterior_mismatch(const SurfaceMeasure& mu, const DomainSpec& omega_plus, Vec3 center, double radius,
                         int samples = 256);

/// -m^2 / (4 pi R): minimum of the limit energy for a ball of radius R.
double ball_surface_energy(double R);

struct GammaPoint {
    double eps = 0.0;
    double energy = 0.0;  // min F_eps from the radial solver (lambda = m, density cap 1 / eps)
    bool converged = false;
};

/// Radial minima of F_eps for a ball and decreasing eps.
std::vector<GammaPoint> gamma_energy_sequence(const DomainSpec& ball, const std::vector<double>& eps_list, int nr);

}  // namespace screen
