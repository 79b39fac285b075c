#include "screen/spherical_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "screen/energy.hpp"
#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "screen/relaxed_solver.hpp"

namespace screen {

namespace {

constexpr double kPi = std::numbers::pi;

double cube(double x) { return x * x * x; }

double shell_charge(const RadialShell& s, double r) {
    const double c = std::clamp(r, s.r_inner, s.r_outer);
    return s.sign * (4.0 * kPi / 3.0) * (cube(c) - cube(s.r_inner));
}

}  // namespace

RadialConfig::RadialConfig(std::vector<RadialShell> shells) : shells_(std::move(shells)) {
    double prev = 0.0;
    for (std::size_t i = 0; i < shells_.size(); ++i) {
        const RadialShell& s = shells_[i];
        if (!(s.r_inner >= 0.0) || !(s.r_outer >= s.r_inner) || !std::isfinite(s.r_outer)) {
            std::ostringstream os;
            os << "RadialConfig: shell " << i << " needs 0 <= r_inner <= r_outer";
            throw PreconditionError(os.str());
        }
        if (s.sign != 1 && s.sign != -1) throw PreconditionError("RadialConfig: sign must be +1 or -1");
        if (s.r_inner < prev) {
            std::ostringstream os;
            os << "RadialConfig: shell " << i << " overlaps its predecessor or is out of order";
            throw PreconditionError(os.str());
        }
        prev = s.r_outer;
    }
}

double RadialConfig::enclosed_charge(double r) const {
    double q = 0.0;
    for (const RadialShell& s : shells_) q += shell_charge(s, r);
    return q;
}

double RadialConfig::outer_radius() const { return shells_.empty() ? 0.0 : shells_.back().r_outer; }

double RadialConfig::volume(int sign) const {
    double v = 0.0;
    for (const RadialShell& s : shells_) {
        if (s.sign == sign) v += (4.0 * kPi / 3.0) * (cube(s.r_outer) - cube(s.r_inner));
    }
    return v;
}

double critical_ratio_residual(double R) { return 2.0 * (R * R - 1.0) - std::cbrt(std::pow(2.0 * (cube(R) - 1.0), 2.0)); }

double critical_ratio() {
    static const double root = [] {
        // The residual is negative just above 1 and positive at 4.
        double lo = 1.0 + 1e-6;
        double hi = 4.0;
        while (hi - lo > 1e-14) {
            const double mid = 0.5 * (lo + hi);
            (critical_ratio_residual(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return root;
}

std::pair<double, double> optimal_bilayer(double R1, double R2) {
    if (!(R1 > 0.0) || !(R2 > R1)) throw PreconditionError("optimal_bilayer: need 0 < R1 < R2");
    const double rho = R2 / R1;
    if (rho >= critical_ratio()) {
        std::ostringstream os;
        os << "optimal_bilayer: ratio R2/R1 = " << rho << " >= R* = " << critical_ratio()
           << "; the inner hole is filled, use optimal_outer_only";
        throw DomainError(os.str());
    }
    const double c3 = 2.0 * (cube(rho) - 1.0);
    const double c2 = 2.0 * (rho * rho - 1.0);
    const auto residual = [&](double x, double y) {
        return std::max(std::abs(cube(x) - cube(y) + c3), std::abs(x * x - y * y + c2));
    };

    // Newton on the pair of equations, scaled to R1 = 1.
    double x = 0.5;
    double y = std::cbrt(c3 + 1.0);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const double f = cube(x) - cube(y) + c3;
        const double g = x * x - y * y + c2;
        const double det = 6.0 * x * y * (y - x);
        if (!(std::abs(det) > 1e-300)) break;
        // J = [[3x^2, -3y^2], [2x, -2y]]
        const double dx = (-2.0 * y * f + 3.0 * y * y * g) / det;
        const double dy = (-2.0 * x * f + 3.0 * x * x * g) / det;
        x -= dx;
        y -= dy;
        if (!std::isfinite(x) || !std::isfinite(y)) break;
        if (residual(x, y) <= 1e-14) {
            ok = true;
            break;
        }
    }
    if (!ok || !(x > 0.0 && x < 1.0 && y > rho)) {
        // Reduced scalar equation in x with y = sqrt(x^2 + c2); positive at 0, negative at 1.
        const auto h = [&](double t) { return cube(t) - std::pow(t * t + c2, 1.5) + c3; };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            (h(mid) > 0.0 ? lo : hi) = mid;
        }
        x = 0.5 * (lo + hi);
        y = std::sqrt(x * x + c2);
    }
    return {R1 * x, R1 * y};
}

double optimal_outer_only(double R1, double R2) {
    if (!(R1 >= 0.0) || !(R2 > R1)) throw PreconditionError("optimal_outer_only: need 0 <= R1 < R2");
    if (R1 > 0.0 && R2 / R1 < critical_ratio() * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "optimal_outer_only: ratio R2/R1 = " << R2 / R1 << " < R* = " << critical_ratio()
           << "; the minimiser is a bilayer, use optimal_bilayer";
        throw DomainError(os.str());
    }
    return std::cbrt(2.0 * (cube(R2) - cube(R1)));
}

RadialConfig optimal_configuration(double R1, double R2) {
    if (!(R1 >= 0.0) || !(R2 > R1)) throw PreconditionError("optimal_configuration: need 0 <= R1 < R2");
    if (R1 == 0.0) return RadialConfig({{0.0, R2, 1}, {R2, optimal_outer_only(0.0, R2), -1}});
    if (R2 / R1 < critical_ratio()) {
        const auto [r1, r2] = optimal_bilayer(R1, R2);
        return RadialConfig({{r1, R1, -1}, {R1, R2, 1}, {R2, r2, -1}});
    }
    return RadialConfig({{0.0, R1, -1}, {R1, R2, 1}, {R2, optimal_outer_only(R1, R2), -1}});
}

double total_energy_closed_form(const RadialConfig& config) {
    const auto& s = config.shells();
    double e = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        e += annulus_self_energy(s[i].r_inner, s[i].r_outer);
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            e += 2.0 * s[i].sign * s[j].sign *
                 annuli_interaction_energy(s[i].r_inner, s[i].r_outer, s[j].r_inner, s[j].r_outer);
        }
    }
    return e;
}

double config_potential(const RadialConfig& config, double r) {
    std::vector<double> breaks;
    for (const RadialShell& s : config.shells()) {
        breaks.push_back(s.r_inner);
        breaks.push_back(s.r_outer);
    }
    return radial_potential([&config](double t) { return config.enclosed_charge(t); }, r, config.outer_radius(),
                            breaks, RadialCharge::signed_net);
}

std::pair<DomainSpec, DomainSpec> two_ball_configuration(double R, double d) {
    if (!(R > 0.0)) throw PreconditionError("two_ball_configuration: R must be positive");
    const double ring = std::cbrt(2.0) * R;
    if (!(d >= 2.0 * ring * (1.0 - 1e-12))) {
        std::ostringstream os;
        os << "two_ball_configuration: d = " << d << " is below 2 cbrt(2) R = " << 2.0 * ring
           << "; the separate annuli would overlap";
        throw PreconditionError(os.str());
    }
    const Vec3 a{-0.5 * d, 0.0, 0.0};
    const Vec3 b{0.5 * d, 0.0, 0.0};
    return {DomainSpec::union_of({DomainSpec::ball(a, R), DomainSpec::ball(b, R)}),
            DomainSpec::union_of({DomainSpec::annulus(a, R, ring), DomainSpec::annulus(b, R, ring)})};
}

namespace {

// Shell-wise Newtonian operator: (A w)_k = int_{shell k} phi_w for piecewise-constant w.
struct ShellOperator {
    std::vector<double> volume, half_d2, self;

    explicit ShellOperator(const std::vector<double>& edges) {
        const std::size_t n = edges.size() - 1;
        volume.resize(n);
        half_d2.resize(n);
        self.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            volume[k] = 4.0 * kPi / 3.0 * (cube(edges[k + 1]) - cube(edges[k]));
            half_d2[k] = 0.5 * (edges[k + 1] * edges[k + 1] - edges[k] * edges[k]);
            self[k] = annulus_self_energy(edges[k], edges[k + 1]);
        }
    }

    void apply(const std::vector<double>& w, std::vector<double>& out) const {
        const std::size_t n = w.size();
        double q = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = half_d2[k] * q + w[k] * self[k];
            q += w[k] * volume[k];
        }
        double s = 0.0;
        for (std::size_t k = n; k-- > 0;) {
            out[k] += volume[k] * s;
            s += w[k] * half_d2[k];
        }
    }

    double dot(const std::vector<double>& a, const std::vector<double>& b) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
        return acc;
    }
};

}  // namespace

RadialProfile radial_relaxed_solve(const RadialConfig& omega_plus_shells, double lambda, int nr, double rmax,
                                   const RadialSolveOptions& opts) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw PreconditionError("radial_relaxed_solve: lambda must be >= 0");
    if (nr < 8) throw PreconditionError("radial_relaxed_solve: nr must be >= 8");
    if (!(rmax > omega_plus_shells.outer_radius())) {
        throw PreconditionError("radial_relaxed_solve: rmax must exceed the outer radius of omega_plus");
    }
    if (!(opts.density_cap > 0.0) || !(opts.step_tau > 0.0)) {
        throw PreconditionError("radial_relaxed_solve: density_cap and step_tau must be positive");
    }
    for (const RadialShell& s : omega_plus_shells.shells()) {
        if (s.sign != 1) throw PreconditionError("radial_relaxed_solve: omega_plus shells must be positive");
    }

    const std::size_t n = static_cast<std::size_t>(nr);
    RadialProfile out;
    out.density_cap = opts.density_cap;
    out.edges.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.edges[k] = rmax * static_cast<double>(k) / nr;
    const ShellOperator op(out.edges);

    out.omega_plus.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = out.edges[k], hi = out.edges[k + 1];
        double frac = 0.0;
        for (const RadialShell& s : omega_plus_shells.shells()) {
            const double a = std::max(lo, s.r_inner), b = std::min(hi, s.r_outer);
            if (b > a) frac += (cube(b) - cube(a)) / (cube(hi) - cube(lo));
        }
        out.omega_plus[k] = std::min(frac, 1.0);
    }
    std::vector<double> cap(n);
    for (std::size_t k = 0; k < n; ++k) cap[k] = opts.density_cap * std::max(0.0, 1.0 - out.omega_plus[k]);
    const double m = op.dot(out.omega_plus, op.volume);
    const double tol = opts.tol_residual > 0.0 ? opts.tol_residual : 1e-8 * m;

    std::vector<double> u(n, 0.0), w(n), aw(n), p(n), trial(n), trial_p(n);
    const auto potential_of = [&](const std::vector<double>& dens, std::vector<double>& pot) {
        for (std::size_t k = 0; k < n; ++k) w[k] = out.omega_plus[k] - dens[k];
        op.apply(w, aw);
        for (std::size_t k = 0; k < n; ++k) pot[k] = aw[k] / op.volume[k];
        return op.dot(w, aw);
    };
    double energy = potential_of(u, p);

    const double tau0 = opts.step_tau;
    double shift0 = 0.0;
    const auto nominal_change = [&] {
        for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + 2.0 * tau0 * p[k];
        shift0 = project_admissible(trial, cap, op.volume, lambda);
        double change = 0.0;
        for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(trial[k] - u[k]));
        return change;
    };

    double tau = tau0;
    out.residual = lambda == 0.0 ? 0.0 : nominal_change();
    out.converged = out.residual <= tol;
    int it = 0;
    for (; !out.converged && it < opts.max_iters; ++it) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + 2.0 * tau * p[k];
        project_admissible(trial, cap, op.volume, lambda);
        const double trial_energy = potential_of(trial, trial_p);
        if (trial_energy > energy + 1e-14 * std::abs(energy)) {
            tau *= 0.5;
            if (tau < 1e-6) throw std::runtime_error("radial_relaxed_solve: step size fell below 1e-06 without energy decrease");
            continue;
        }
        double ss = 0.0, sks = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = trial[k] - u[k];
            ss += op.volume[k] * d * d;
            sks += op.volume[k] * d * (p[k] - trial_p[k]);
        }
        u.swap(trial);
        p.swap(trial_p);
        energy = trial_energy;
        out.residual = nominal_change();
        if (out.residual <= tol) {
            out.converged = true;
            ++it;
            break;
        }
        tau = sks > 0.0 ? std::clamp(ss / (2.0 * sks), 1e-6, 1e6) : 1.25 * tau;
    }
    out.iterations = it;
    out.multiplier = shift0 / (2.0 * tau0);
    out.energy = energy;
    op.apply(out.omega_plus, aw);
    out.limit_energy = energy - op.dot(out.omega_plus, aw);
    out.mass = op.dot(u, op.volume);
    out.potential = std::move(p);
    out.u = std::move(u);
    return out;
}

std::vector<std::pair<double, double>> negative_shells(const RadialProfile& profile) {
    const std::size_t n = profile.u.size();
    const auto& e = profile.edges;
    const auto& a = profile.omega_plus;
    std::vector<double> occ(n);
    for (std::size_t k = 0; k < n; ++k) occ[k] = profile.u[k] / profile.density_cap;

    std::vector<std::pair<double, double>> out;
    std::size_t k = 0;
    while (k < n) {
        if (occ[k] <= 1e-6) {
            ++k;
            continue;
        }
        const std::size_t i = k;
        double vol = 0.0;  // (3 / 4 pi) times the occupied volume
        while (k < n && occ[k] > 1e-6) {
            vol += occ[k] * (cube(e[k + 1]) - cube(e[k]));
            ++k;
        }
        const std::size_t j = k - 1;
        const bool inner_touch = a[i] > 0.0 || (i > 0 && a[i - 1] > 0.0);
        const bool outer_touch = a[j] > 0.0 || (j + 1 < n && a[j + 1] > 0.0);
        double r_in = 0.0, r_out = 0.0;
        if (inner_touch) {
            r_in = std::cbrt(cube(e[i + 1]) - occ[i] * (cube(e[i + 1]) - cube(e[i])));
            r_out = std::cbrt(cube(r_in) + vol);
        } else if (outer_touch) {
            r_out = std::cbrt(cube(e[j]) + occ[j] * (cube(e[j + 1]) - cube(e[j])));
            r_in = std::cbrt(std::max(0.0, cube(r_out) - vol));
        } else {
            r_in = e[i];
            r_out = std::cbrt(cube(r_in) + vol);
        }
        out.emplace_back(r_in, r_out);
    }
    return out;
}

}  // namespace screen
