#include "screen/surface_charge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <variant>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "screen/spherical_oracle.hpp"

namespace screen {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sphere {
    Vec3 center;
    double radius;
};

std::vector<Sphere> boundary_spheres(const DomainSpec& omega_plus) {
    std::vector<Sphere> out;
    for (const DomainSpec& leaf : omega_plus.leaves()) {
        if (const auto* b = std::get_if<Ball>(&leaf.shape())) {
            out.push_back({b->center, b->radius});
        } else if (const auto* a = std::get_if<Annulus>(&leaf.shape())) {
            if (a->r_inner > 0.0) out.push_back({a->center, a->r_inner});
            out.push_back({a->center, a->r_outer});
        }
    }
    return out;
}

void add_sphere(SurfaceMeasure& mu, Vec3 center, double radius, int n) {
    const double w = 4.0 * kPi * radius * radius / n;
    for (const Vec3& d : fibonacci_sphere(n)) {
        mu.nodes.push_back(center + radius * d);
        mu.weights.push_back(w);
    }
}

// Pairwise kernel with the chosen diagonal, stored densely (n is at most a few thousand).
struct NodeKernel {
    std::size_t n;
    std::vector<double> b;

    // Nodes come in blocks of `per_sphere`, one block per entry of `spheres`.
    NodeKernel(const SurfaceMeasure& mu, SelfInteraction self, const std::vector<Sphere>& spheres,
               std::size_t per_sphere)
        : n(mu.nodes.size()), b(n * n, 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = 1.0 / (4.0 * kPi * distance(mu.nodes[i], mu.nodes[j]));
                b[i * n + j] = v;
                b[j * n + i] = v;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (self == SelfInteraction::disk_patch) {
                // Uniform unit charge on a disk of radius a: (1/4pi) (16 pi / 3) a^3 / (pi a^2)^2.
                const double a = std::sqrt(mu.weights[i] / kPi);
                b[i * n + i] = 4.0 / (3.0 * kPi * kPi * a);
            } else if (self == SelfInteraction::consistent) {
                // Singularity subtraction: density 1 on the node's own sphere has potential R there,
                // so the diagonal supplies whatever the off-diagonal quadrature misses.
                const std::size_t s = i / per_sphere;
                const std::size_t first = s * per_sphere;
                double sum = 0.0;
                for (std::size_t j = first; j < first + per_sphere; ++j) sum += b[i * n + j] * mu.weights[j];
                b[i * n + i] = (spheres[s].radius - sum) / mu.weights[i];
            }
        }
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &b[i * n];
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

SurfaceMeasure discretize_boundary(const DomainSpec& omega_plus, int n) {
    if (n < 1) throw PreconditionError("discretize_boundary: n must be positive");
    if (!omega_plus.is_analytic()) throw UnsupportedError("discretize_boundary: voxel domains have no analytic boundary");
    SurfaceMeasure mu;
    for (const Sphere& s : boundary_spheres(omega_plus)) add_sphere(mu, s.center, s.radius, n);
    mu.masses.assign(mu.nodes.size(), 0.0);
    return mu;
}

void project_simplex(std::vector<double>& v, double total) {
    if (v.empty()) throw PreconditionError("project_simplex: empty vector");
    if (!(total >= 0.0)) throw PreconditionError("project_simplex: total must be >= 0");
    std::vector<double> s(v);
    std::sort(s.begin(), s.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        cumulative += s[k];
        const double t = (cumulative - total) / static_cast<double>(k + 1);
        if (s[k] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
}

double measure_potential(const SurfaceMeasure& mu, Vec3 x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.nodes.size(); ++i) acc += mu.masses[i] / distance(x, mu.nodes[i]);
    return acc / (4.0 * kPi);
}

double exterior_mismatch(const SurfaceMeasure& mu, const DomainSpec& omega_plus, Vec3 center, double radius,
                         int samples) {
    double worst = 0.0;
    for (const Vec3& d : fibonacci_sphere(samples)) {
        const Vec3 x = center + radius * d;
        const double ref = uniform_potential(omega_plus, x);
        worst = std::max(worst, std::abs(measure_potential(mu, x) - ref) / std::abs(ref));
    }
    return worst;
}

double ball_surface_energy(double R) {
    if (!(R > 0.0)) throw PreconditionError("ball_surface_energy: R must be positive");
    const double m = 4.0 * kPi / 3.0 * R * R * R;
    return -m * m / (4.0 * kPi * R);
}

SurfaceSolution solve_surface_measure(const DomainSpec& omega_plus, int n, const SolveConfig& cfg,
                                      SelfInteraction self, const std::vector<double>* start) {
    if (n < 10) throw PreconditionError("solve_surface_measure: n must be >= 10");
    SurfaceSolution out;
    out.measure = discretize_boundary(omega_plus, n);
    SurfaceMeasure& mu = out.measure;
    const std::size_t count = mu.nodes.size();
    const double m = omega_plus.volume();
    const NodeKernel kernel(mu, self, boundary_spheres(omega_plus), static_cast<std::size_t>(n));

    std::vector<double> phi_plus(count);
    double scale = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        phi_plus[i] = uniform_potential(omega_plus, mu.nodes[i]);
        scale = std::max(scale, std::abs(phi_plus[i]));
    }
    const double tol = cfg.tol_residual > 0.0 ? cfg.tol_residual : 1e-8 * scale;

    // F(x) = -2 phi_plus.x + x.Bx, gradient 2 (Bx - phi_plus).
    std::vector<double> x(count, m / static_cast<double>(count)), bx(count), grad(count);
    if (start != nullptr) {
        if (start->size() != count) throw PreconditionError("solve_surface_measure: start has the wrong length");
        x = *start;
        for (double q : x) {
            if (!(q >= 0.0) || !std::isfinite(q)) throw PreconditionError("solve_surface_measure: start must be nonnegative");
        }
        project_simplex(x, m);
    }
    std::vector<double> trial(count), trial_bx(count), trial_grad(count), probe(count);
    const auto evaluate = [&](const std::vector<double>& xs, std::vector<double>& bxs, std::vector<double>& g) {
        kernel.apply(xs, bxs);
        for (std::size_t i = 0; i < count; ++i) g[i] = 2.0 * (bxs[i] - phi_plus[i]);
        return dot(xs, bxs) - 2.0 * dot(phi_plus, xs);
    };
    double energy = evaluate(x, bx, grad);

    // Stationarity in potential units: || x - P(x - t g) ||_inf / t for a reference step t
    // that moves a typical node mass by about its own size.
    const double t_ref = (m / static_cast<double>(count)) / std::max(scale, 1e-300);
    const auto stationarity = [&] {
        for (std::size_t i = 0; i < count; ++i) probe[i] = x[i] - t_ref * grad[i];
        project_simplex(probe, m);
        double r = 0.0;
        for (std::size_t i = 0; i < count; ++i) r = std::max(r, std::abs(probe[i] - x[i]));
        return r / t_ref;
    };

    double tau = t_ref;
    out.residual = stationarity();
    out.converged = out.residual <= tol;
    int it = 0;
    for (; !out.converged && it < cfg.max_iters; ++it) {
        for (std::size_t i = 0; i < count; ++i) trial[i] = x[i] - tau * grad[i];
        project_simplex(trial, m);
        const double trial_energy = evaluate(trial, trial_bx, trial_grad);
        if (trial_energy > energy + 1e-14 * std::abs(energy)) {
            tau *= 0.5;
            if (tau < 1e-12 * t_ref) throw std::runtime_error("solve_surface_measure: step size collapsed");
            continue;
        }
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double d = trial[i] - x[i];
            ss += d * d;
            sy += d * (trial_grad[i] - grad[i]);
        }
        x.swap(trial);
        bx.swap(trial_bx);
        grad.swap(trial_grad);
        energy = trial_energy;
        out.residual = stationarity();
        if (out.residual <= tol) {
            out.converged = true;
            ++it;
            break;
        }
        tau = sy > 0.0 ? std::clamp(ss / sy, 1e-6 * t_ref, 1e6 * t_ref) : 2.0 * tau;
    }
    out.iterations = it;
    out.energy = energy;
    double level = 0.0, charged = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (x[i] > 0.0) {
            level += x[i] * (phi_plus[i] - bx[i]);
            charged += x[i];
        }
    }
    out.level = charged > 0.0 ? level / charged : 0.0;
    mu.masses = std::move(x);
    mu.total_mass = 0.0;
    for (double q : mu.masses) mu.total_mass += q;
    return out;
}

std::vector<GammaPoint> gamma_energy_sequence(const DomainSpec& ball, const std::vector<double>& eps_list, int nr) {
    const auto* b = std::get_if<Ball>(&ball.shape());
    if (b == nullptr) throw UnsupportedError("gamma_energy_sequence: only a single ball is supported");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw PreconditionError("gamma_energy_sequence: eps must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
            throw PreconditionError("gamma_energy_sequence: eps must be strictly decreasing");
        }
    }
    const RadialConfig plus({{0.0, b->radius, 1}});
    const double m = plus.volume(1);
    std::vector<GammaPoint> out;
    for (double eps : eps_list) {
        RadialSolveOptions opts;
        opts.density_cap = 1.0 / eps;
        // The saturated shell ends at cbrt(1 + eps) R; 2R leaves room for every eps <= 7.
        const double rmax = std::max(2.0, 1.25 * std::cbrt(1.0 + eps)) * b->radius;
        const RadialProfile p = radial_relaxed_solve(plus, m, nr, rmax, opts);
        out.push_back({eps, p.limit_energy, p.converged});
    }
    return out;
}

}  // namespace screen
