#include "screen/relaxed_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"

namespace screen {

namespace {

constexpr double kTauMin = 1e-6;
constexpr double kTauGrowth = 1.25;
constexpr double kTauMax = 1e6;
constexpr int kBisectionSteps = 60;

std::vector<double> admissible_cap(const ScalarField& omega_plus) {
    std::vector<double> cap(omega_plus.size());
    for (std::size_t n = 0; n < cap.size(); ++n) cap[n] = std::clamp(1.0 - omega_plus[n], 0.0, 1.0);
    return cap;
}

double net_energy(const ScalarField& omega_plus, std::span<const double> u, std::span<const double> phi) {
    double acc = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) acc += phi[n] * (omega_plus[n] - u[n]);
    return omega_plus.grid().cell_volume() * acc;
}

// Coarse copy of a fine field on the grid with doubled spacing and the same origin,
// averaging the (up to) 8 children of each coarse cell.
ScalarField restrict_average(const ScalarField& fine, const GridSpec& coarse) {
    ScalarField out(coarse, 0.0);
    const GridSpec& g = fine.grid();
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) out.at(i / 2, j / 2, k / 2) += 0.125 * fine.at(i, j, k);
        }
    }
    return out;
}

ScalarField prolong_inject(const ScalarField& coarse, const GridSpec& fine) {
    ScalarField out(fine, 0.0);
    for (int k = 0; k < fine.dim(2); ++k) {
        for (int j = 0; j < fine.dim(1); ++j) {
            for (int i = 0; i < fine.dim(0); ++i) out.at(i, j, k) = coarse.at(i / 2, j / 2, k / 2);
        }
    }
    return out;
}

std::optional<GridSpec> coarsened(const GridSpec& g) {
    Index3 dims{};
    for (int a = 0; a < 3; ++a) {
        const int n = (g.dim(a) + 1) / 2;
        if (n < 12) return std::nullopt;
        dims[static_cast<std::size_t>(a)] = n;
    }
    return GridSpec(g.origin(), 2.0 * g.spacing(), dims);
}

}  // namespace

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::projected_gradient: return "projected_gradient";
        case Algorithm::obstacle_pgs: return "obstacle_pgs";
        case Algorithm::both: return "both";
    }
    return "unknown";
}

namespace {

template <class Volume>
double project_impl(std::span<double> v, std::span<const double> cap, Volume volume, double lambda) {
    double mass = 0.0;
    double vmax = 0.0;
    std::vector<std::size_t> positive;
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (v[n] > 0.0 && cap[n] > 0.0) {
            positive.push_back(n);
            vmax = std::max(vmax, v[n]);
            mass += volume(n) * std::min(v[n], cap[n]);
        }
    }
    double shift = 0.0;
    if (mass > lambda) {
        // Clipped mass is nonincreasing in the shift; bisect for mass(shift) = lambda.
        // Only cells with v > 0 can contribute for a nonnegative shift.
        double lo = 0.0;
        double hi = vmax;
        for (int it = 0; it < kBisectionSteps; ++it) {
            const double mid = 0.5 * (lo + hi);
            double mm = 0.0;
            for (std::size_t n : positive) mm += volume(n) * std::clamp(v[n] - mid, 0.0, cap[n]);
            if (mm > lambda) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        shift = hi;
    }
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = std::clamp(v[n] - shift, 0.0, cap[n]);
    return shift;
}

}  // namespace

double project_admissible(std::span<double> v, std::span<const double> cap, double cell_volume, double lambda) {
    if (v.size() != cap.size()) throw PreconditionError("project_admissible: size mismatch");
    return project_impl(v, cap, [cell_volume](std::size_t) { return cell_volume; }, lambda);
}

double project_admissible(std::span<double> v, std::span<const double> cap, std::span<const double> volumes,
                          double lambda) {
    if (v.size() != cap.size() || v.size() != volumes.size()) {
        throw PreconditionError("project_admissible: size mismatch");
    }
    return project_impl(v, cap, [volumes](std::size_t n) { return volumes[n]; }, lambda);
}

RelaxedSolution solve_relaxed(const ScalarField& omega_plus, double lambda, const SolveConfig& cfg,
                              const ScalarField* initial_guess) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw PreconditionError("solve_relaxed: lambda must be >= 0");
    if (!(cfg.step_tau > 0.0)) throw PreconditionError("solve_relaxed: step_tau must be positive");
    const GridSpec& grid = omega_plus.grid();
    const double h3 = grid.cell_volume();
    const double m = omega_plus.integral();
    const double tol = cfg.tolerance_for(m);
    const std::vector<double> cap = admissible_cap(omega_plus);

    ScalarField u(grid, 0.0);
    if (initial_guess != nullptr) {
        require_same_grid(omega_plus, *initial_guess, "solve_relaxed");
        u = *initial_guess;
    } else if (cfg.coarse_levels > 0 && lambda > 0.0) {
        if (const auto cg = coarsened(grid)) {
            SolveConfig coarse_cfg = cfg;
            coarse_cfg.coarse_levels = cfg.coarse_levels - 1;
            coarse_cfg.on_step = nullptr;
            const ScalarField coarse_plus = restrict_average(omega_plus, *cg);
            const RelaxedSolution coarse = solve_relaxed(coarse_plus, lambda, coarse_cfg);
            u = prolong_inject(coarse.density.field, grid);
        }
    }
    project_admissible(u.values(), cap, h3, lambda);

    NewtonianOperator op(grid);
    const ScalarField phi_plus = op.apply(omega_plus);
    std::vector<double> ku(grid.size());
    ScalarField phi(grid, 0.0);
    op.apply(u.values(), ku);
    for (std::size_t n = 0; n < phi.size(); ++n) phi[n] = phi_plus[n] - ku[n];
    double energy = net_energy(omega_plus, u.values(), phi.values());

    RelaxedSolution out;
    const double tau0 = cfg.step_tau;
    double tau = tau0;
    std::vector<double> trial(grid.size());
    std::vector<double> trial_phi(grid.size());

    // Stationarity is measured with the nominal step tau0: the L-infinity change of one step
    // u <- P(u + 2 tau0 phi). The accepted steps themselves use longer steps, so their change
    // is not comparable across iterations.
    double shift0 = 0.0;
    const auto nominal_change = [&] {
        for (std::size_t n = 0; n < trial.size(); ++n) trial[n] = u[n] + 2.0 * tau0 * phi[n];
        shift0 = project_admissible(trial, cap, h3, lambda);
        double change = 0.0;
        for (std::size_t n = 0; n < trial.size(); ++n) change = std::max(change, std::abs(trial[n] - u[n]));
        return change;
    };

    out.residual = lambda == 0.0 ? 0.0 : nominal_change();
    out.converged = out.residual <= tol;
    int it = 0;
    for (; !out.converged && it < cfg.max_iters; ++it) {
        for (std::size_t n = 0; n < trial.size(); ++n) trial[n] = u[n] + 2.0 * tau * phi[n];
        project_admissible(trial, cap, h3, lambda);

        op.apply(trial, ku);
        for (std::size_t n = 0; n < trial_phi.size(); ++n) trial_phi[n] = phi_plus[n] - ku[n];
        const double trial_energy = net_energy(omega_plus, trial, trial_phi);

        if (trial_energy > energy + 1e-14 * std::abs(energy)) {
            tau *= 0.5;
            if (tau < kTauMin) {
                std::ostringstream os;
                os << "solve_relaxed: step size fell below " << kTauMin << " without energy decrease";
                throw std::runtime_error(os.str());
            }
            continue;
        }
        double ss = 0.0, sks = 0.0;
        for (std::size_t n = 0; n < trial.size(); ++n) {
            const double d = trial[n] - u[n];
            ss += d * d;
            sks += d * (phi[n] - trial_phi[n]);
        }
        std::copy(trial.begin(), trial.end(), u.values().begin());
        std::copy(trial_phi.begin(), trial_phi.end(), phi.values().begin());
        energy = trial_energy;
        out.residual = nominal_change();
        if (cfg.on_step) cfg.on_step(it, energy, out.residual, tau);
        if (out.residual <= tol) {
            out.converged = true;
            ++it;
            break;
        }
        // Barzilai-Borwein length from the accepted step; K is positive definite, so sks > 0
        // unless the step was numerically null.
        if (sks > 0.0) {
            tau = std::clamp(ss / (2.0 * sks), kTauMin, kTauMax);
        } else {
            tau *= kTauGrowth;
        }
    }
    out.iterations = it;
    out.final_tau = tau;
    // The shift acts on u + 2 tau0 phi, so the multiplier on phi is shift / (2 tau0).
    out.multiplier = shift0 / (2.0 * tau0);

    const ScalarField phi_minus = [&] {
        ScalarField f(grid, 0.0);
        op.apply(u.values(), f.values());
        return f;
    }();
    out.energy = energy_from_potentials(omega_plus, u, phi_plus, phi_minus);
    out.phi = std::move(phi);
    out.density.mass = u.integral();
    out.density.field = std::move(u);
    out.density.lambda_cap = lambda;
    out.density.omega_plus_mask = std::make_shared<const ScalarField>(omega_plus);
    return out;
}

namespace {

// phi on the grid with one layer of zero ghost cells around it (the Dirichlet data).
class Padded {
public:
    explicit Padded(const GridSpec& g)
        : nx_(g.dim(0) + 2), ny_(g.dim(1) + 2), nz_(g.dim(2) + 2),
          data_(static_cast<std::size_t>(nx_) * ny_ * nz_, 0.0) {}

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i + 1) + static_cast<std::size_t>(nx_) *
                                                     (static_cast<std::size_t>(j + 1) + static_cast<std::size_t>(ny_) * (k + 1));
    }
    double& at(int i, int j, int k) { return data_[index(i, j, k)]; }
    double at(int i, int j, int k) const { return data_[index(i, j, k)]; }
    std::size_t stride_y() const { return static_cast<std::size_t>(nx_); }
    std::size_t stride_z() const { return static_cast<std::size_t>(nx_) * ny_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

private:
    int nx_, ny_, nz_;
    std::vector<double> data_;
};

// Trilinear interpolation of a coarse field (spacing 2h, same origin) at fine cell centres,
// with zero ghost values one cell outside the coarse grid.
ScalarField prolong_linear(const ScalarField& coarse, const GridSpec& fine) {
    const GridSpec& cg = coarse.grid();
    const auto value = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= cg.dim(0) || j >= cg.dim(1) || k >= cg.dim(2)) return 0.0;
        return coarse.at(i, j, k);
    };
    ScalarField out(fine, 0.0);
    for (int k = 0; k < fine.dim(2); ++k) {
        const double zc = 0.5 * k - 0.25;
        const int k0 = static_cast<int>(std::floor(zc));
        const double tz = zc - k0;
        for (int j = 0; j < fine.dim(1); ++j) {
            const double yc = 0.5 * j - 0.25;
            const int j0 = static_cast<int>(std::floor(yc));
            const double ty = yc - j0;
            for (int i = 0; i < fine.dim(0); ++i) {
                const double xc = 0.5 * i - 0.25;
                const int i0 = static_cast<int>(std::floor(xc));
                const double tx = xc - i0;
                double acc = 0.0;
                for (int c = 0; c < 8; ++c) {
                    const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
                    const double w = (di ? tx : 1.0 - tx) * (dj ? ty : 1.0 - ty) * (dk ? tz : 1.0 - tz);
                    if (w != 0.0) acc += w * value(i0 + di, j0 + dj, k0 + dk);
                }
                out.at(i, j, k) = acc;
            }
        }
    }
    return out;
}

constexpr double kFullCell = 1.0 - 1e-12;

}  // namespace

ObstacleSolution solve_obstacle(const ScalarField& omega_plus, const GridSpec& grid, const SolveConfig& cfg) {
    if (!(omega_plus.grid() == grid)) throw PreconditionError("solve_obstacle: omega_plus is not sampled on grid");
    if (!(cfg.sor_omega > 0.0 && cfg.sor_omega < 2.0)) throw PreconditionError("solve_obstacle: sor_omega must be in (0, 2)");
    const double h = grid.spacing();
    const double m = omega_plus.integral();
    const double stop = cfg.tolerance_for(m > 0.0 ? m : 1.0) * h * h;

    ObstacleSolution out{ScalarField(grid, 0.0)};
    if (m <= 0.0) {
        out.converged = true;
        return out;
    }

    Padded phi(grid);
    if (cfg.coarse_levels > 0) {
        if (const auto cg = coarsened(grid)) {
            SolveConfig coarse_cfg = cfg;
            coarse_cfg.coarse_levels = cfg.coarse_levels - 1;
            const ScalarField coarse_plus = restrict_average(omega_plus, *cg);
            const ObstacleSolution coarse = solve_obstacle(coarse_plus, *cg, coarse_cfg);
            const ScalarField start = prolong_linear(coarse.phi, grid);
            for (int k = 0; k < grid.dim(2); ++k)
                for (int j = 0; j < grid.dim(1); ++j)
                    for (int i = 0; i < grid.dim(0); ++i) phi.at(i, j, k) = start.at(i, j, k);
        }
    }

    const int nx = grid.dim(0), ny = grid.dim(1), nz = grid.dim(2);
    std::vector<double> rhs(grid.size());
    std::vector<unsigned char> free_cell(grid.size());
    for (std::size_t n = 0; n < rhs.size(); ++n) {
        rhs[n] = h * h * (2.0 * omega_plus[n] - 1.0);
        free_cell[n] = omega_plus[n] >= kFullCell ? 1 : 0;
    }
    const double omega = cfg.sor_omega;
    const std::size_t sy = phi.stride_y(), sz = phi.stride_z();
    double* p = phi.data();

    int sweep = 0;
    double last = 0.0;
    while (sweep < cfg.max_sweeps) {
        ++sweep;
        double biggest = 0.0;
        std::size_t n = 0;
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                std::size_t q = phi.index(0, j, k);
                for (int i = 0; i < nx; ++i, ++q, ++n) {
                    const double s = p[q - 1] + p[q + 1] + p[q - sy] + p[q + sy] + p[q - sz] + p[q + sz];
                    const double g = (s + rhs[n]) / 6.0;
                    double next = p[q] + omega * (g - p[q]);
                    if (!free_cell[n] && next < 0.0) next = 0.0;
                    biggest = std::max(biggest, std::abs(next - p[q]));
                    p[q] = next;
                }
            }
        }
        last = biggest;
        if (biggest <= stop) {
            out.converged = true;
            break;
        }
    }
    out.sweeps = sweep;
    out.residual = last;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) out.phi.at(i, j, k) = phi.at(i, j, k);
    return out;
}

ScalarField implied_density(const ScalarField& phi, const ScalarField& omega_plus) {
    require_same_grid(phi, omega_plus, "implied_density");
    const GridSpec& g = phi.grid();
    const double h2 = g.spacing() * g.spacing();
    const auto value = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= g.dim(0) || j >= g.dim(1) || k >= g.dim(2)) return 0.0;
        return phi.at(i, j, k);
    };
    ScalarField u(g, 0.0);
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                const double lap = (value(i - 1, j, k) + value(i + 1, j, k) + value(i, j - 1, k) + value(i, j + 1, k) +
                                    value(i, j, k - 1) + value(i, j, k + 1) - 6.0 * phi.at(i, j, k)) /
                                   h2;
                const double a = omega_plus.at(i, j, k);
                u.at(i, j, k) = std::clamp(a + lap, 0.0, std::max(0.0, 1.0 - a));
            }
        }
    }
    return u;
}

double default_phase_threshold(const ScalarField& phi, const SolveConfig& cfg, double kappa) {
    const double h = phi.grid().spacing();
    return std::max(0.0, kappa) + cfg.phase_threshold_factor * h * h * std::max(0.0, phi.max());
}

ScalarField extract_negative_phase(const ScalarField& phi, const ScalarField& omega_plus_mask, double theta) {
    require_same_grid(phi, omega_plus_mask, "extract_negative_phase");
    if (!(theta >= 0.0)) throw PreconditionError("extract_negative_phase: theta must be >= 0");
    ScalarField out(phi.grid(), 0.0);
    for (std::size_t n = 0; n < phi.size(); ++n) {
        out[n] = (phi[n] > theta && omega_plus_mask[n] < 0.5) ? 1.0 : 0.0;
    }
    return out;
}

std::vector<EnergyCurvePoint> energy_curve(const ScalarField& omega_plus, const std::vector<double>& lambdas,
                                           const SolveConfig& cfg) {
    if (!std::is_sorted(lambdas.begin(), lambdas.end())) {
        throw PreconditionError("energy_curve: lambdas must be sorted ascending");
    }
    std::vector<EnergyCurvePoint> curve;
    curve.reserve(lambdas.size());
    std::optional<ScalarField> previous;
    for (double lambda : lambdas) {
        RelaxedSolution sol = solve_relaxed(omega_plus, lambda, cfg, previous ? &*previous : nullptr);
        curve.push_back({lambda, sol.energy.total, sol.density.mass, sol.converged});
        if (sol.density.mass > 0.0) previous = std::move(sol.density.field);
    }
    return curve;
}

}  // namespace screen

namespace screen {

double boundary_layer_max(const ScalarField& f, int layers) {
    const GridSpec& g = f.grid();
    double worst = 0.0;
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                const bool outer = i < layers || j < layers || k < layers || i >= g.dim(0) - layers ||
                                   j >= g.dim(1) - layers || k >= g.dim(2) - layers;
                if (outer) worst = std::max(worst, std::abs(f.at(i, j, k)));
            }
        }
    }
    return worst;
}

DomainSolution solve_domain(const DomainSpec& omega_plus, const DomainSolveOptions& opt, const SolveConfig& cfg) {
    if (!(opt.h > 0.0)) throw PreconditionError("solve_domain: h must be positive");
    if (omega_plus.empty()) throw PreconditionError("solve_domain: omega_plus is empty");
    if (opt.lambda && !(*opt.lambda >= 0.0)) throw PreconditionError("solve_domain: lambda must be >= 0");
    const double scale = std::cbrt(omega_plus.volume());
    double reach = opt.reach;
    for (int growth = 0;; ++growth) {
        const Box box = opt.box == BoxPolicy::suggested ? suggested_box(omega_plus, opt.margin * scale)
                                                          : working_box(omega_plus, reach);
        DomainSolution out;
        out.grid = grid_for_box(box, opt.h);
        out.omega_plus = rasterize(omega_plus, out.grid, opt.subsamples);
        out.m = out.omega_plus.integral();
        out.lambda = opt.lambda.value_or(out.m);
        out.box_growths = growth;

        const bool run_obstacle = cfg.algorithm != Algorithm::projected_gradient;
        const bool run_relaxed = cfg.algorithm != Algorithm::obstacle_pgs;
        double certificate = 0.0;
        out.converged = true;
        std::optional<ScalarField> start;
        if (run_obstacle) {
            out.obstacle = solve_obstacle(out.omega_plus, out.grid, cfg);
            out.converged = out.obstacle->converged;
            // phi decays to exactly zero off the support, so any value left near the faces is a leak.
            const double top = std::max(out.obstacle->phi.max(), 1e-300);
            certificate = std::max(certificate, boundary_layer_max(out.obstacle->phi, opt.certificate_layers) / top);
            out.phi = out.obstacle->phi;
            out.density = implied_density(out.obstacle->phi, out.omega_plus);
            if (out.density.integral() > 0.0) start = out.density;
        }
        if (run_relaxed) {
            out.relaxed = solve_relaxed(out.omega_plus, out.lambda, cfg, start ? &*start : nullptr);
            out.converged = out.converged && out.relaxed->converged;
            certificate = std::max(certificate, boundary_layer_max(out.relaxed->density.field, opt.certificate_layers));
            out.phi = out.relaxed->phi;
            out.density = out.relaxed->density.field;
            out.kappa = std::max(0.0, out.relaxed->multiplier);
        }
        out.support_certified = certificate <= 1e-9;
        const bool can_grow = opt.box == BoxPolicy::working && growth < opt.max_box_growth;
        if (out.support_certified || !can_grow) {
            out.theta = default_phase_threshold(out.phi, cfg, out.kappa);
            out.omega_minus = extract_negative_phase(out.phi, out.omega_plus, out.theta);
            return out;
        }
        reach *= 1.5;
    }
}

}  // namespace screen
