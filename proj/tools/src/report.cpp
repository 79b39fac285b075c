#include "screen_cli/report.hpp"

#include <algorithm>
#include <cmath>

#include "screen/error.hpp"

namespace screen::cli {

using nlohmann::json;

namespace {

Vec3 domain_center(const DomainSpec& d) {
    const auto b = d.bounds();
    return b ? b->center() : Vec3{};
}

// Radius of the largest sphere around c inside the hull of cell centres.
double room(const GridSpec& g, Vec3 c) {
    const double h = g.spacing();
    double r = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        r = std::min(r, c[a] - (g.box_min()[a] + 0.5 * h));
        r = std::min(r, (g.box_max()[a] - 0.5 * h) - c[a]);
    }
    return r;
}

}  // namespace

DiagnosticsReport run_diagnostics(const FieldSet& f, const DomainSpec& omega_plus, const DiagnosticsConfig& cfg,
                                  double lambda) {
    const GridSpec& g = f.phi.grid();
    const double h = g.spacing();
    const double m = f.omega_plus.integral();
    DiagnosticsReport r;
    ChargeDensity u{f.u, f.u.integral(), lambda, nullptr};
    r.neutrality_error = m > 0.0 ? verify_neutrality(u, m) : 0.0;
    r.screening_residual = verify_screening(f.phi, threshold_mask(f.omega_plus, 0.5), f.omega_minus, cfg.exclusion_shells);
    r.min_phi = f.phi.min();
    r.max_phi = f.phi.max();
    r.support = verify_support_bounds(f.omega_minus, omega_plus);

    ScalarField net(g, 0.0);
    for (std::size_t n = 0; n < net.size(); ++n) net[n] = f.omega_plus[n] - f.u[n];
    const Vec3 c = domain_center(omega_plus);
    std::vector<double> radii = cfg.flux_radii;
    if (radii.empty()) {
        // One sphere enclosing every charged cell, half way to the box.
        double support = 0.0;
        for (int k = 0; k < g.dim(2); ++k)
            for (int j = 0; j < g.dim(1); ++j)
                for (int i = 0; i < g.dim(0); ++i)
                    if (net.at(i, j, k) != 0.0) support = std::max(support, distance(g.cell_center(i, j, k), c));
        const double free = room(g, c);
        if (free > support + h) radii.push_back(0.5 * (support + h + free));
    }
    for (double R : radii) {
        if (R > room(g, c)) throw DomainError("flux sphere of radius " + std::to_string(R) + " leaves the grid");
        r.flux.push_back(verify_flux(f.phi, c, R, expected_sphere_integral(net, c, R), m));
    }

    std::vector<double> balls;
    for (double q : cfg.min_diam_radii) balls.push_back(q * h);
    for (const Vec3& p : cfg.min_diam_points) {
        r.min_diam_point = p;
        const auto samples = min_diam_indicator(f.phi, p, balls, f.theta);
        r.min_diam.insert(r.min_diam.end(), samples.begin(), samples.end());
    }
    return r;
}

Checks evaluate_checks(const DiagnosticsReport& r, const FieldSet& f, double lambda) {
    const double h = f.phi.grid().spacing();
    const double m = f.omega_plus.integral();
    const double target = std::min(lambda, m);
    Checks c;
    const double mass = f.u.integral();
    c.neutrality = target > 0.0 ? std::abs(mass - target) <= 0.01 * target : mass == 0.0;
    c.screening = lambda < m || r.screening_residual <= 1e-2;
    c.nonnegativity = r.min_phi >= -10.0 * h * h * std::max(0.0, r.max_phi);
    const auto& s = r.support;
    c.support = s.empty || (s.max_distance <= s.distance_bound + h && s.diameter_ratio <= s.diameter_bound &&
                            s.touching_components == s.components);
    c.flux = std::all_of(r.flux.begin(), r.flux.end(), [](const FluxCheck& x) { return x.error <= 0.02; });
    return c;
}

json to_json(const DiagnosticsReport& r) {
    json flux = json::array();
    for (const auto& x : r.flux) {
        flux.push_back({{"radius", x.radius}, {"measured", x.measured}, {"expected", x.expected}, {"error", x.error}});
    }
    json diam = json::array();
    for (const auto& x : r.min_diam) diam.push_back({{"radius", x.radius}, {"ratio", x.ratio}, {"cells", x.cells}});
    const auto& s = r.support;
    return {
        {"neutrality_error", r.neutrality_error},
        {"screening_residual", r.screening_residual},
        {"min_phi", r.min_phi},
        {"max_phi", r.max_phi},
        {"support",
         {{"empty", s.empty},
          {"max_distance", s.max_distance},
          {"distance_bound", s.distance_bound},
          {"diameter_ratio", s.diameter_ratio},
          {"diameter_bound", s.diameter_bound},
          {"components_touching", {s.touching_components, s.components}},
          {"gap_omega0", s.gap_omega0}}},
        {"flux", flux},
        {"min_diam_point", {r.min_diam_point.x, r.min_diam_point.y, r.min_diam_point.z}},
        {"min_diam", diam},
        {"singular_like", r.min_diam.empty() ? false : singular_like(r.min_diam)},
    };
}

json to_json(const Checks& c) {
    return {{"neutrality", c.neutrality}, {"screening", c.screening}, {"nonnegativity", c.nonnegativity},
            {"support", c.support},       {"flux", c.flux},           {"all", c.all()}};
}

json to_json(const EnergyReport& e) {
    json j = {{"total", e.total},
              {"self_plus", e.self_plus},
              {"self_minus", e.self_minus},
              {"cross", e.cross},
              {"method", std::string(to_string(e.method))}};
    if (e.grid_h) j["grid_h"] = *e.grid_h;
    return j;
}

std::vector<std::vector<double>> radial_profile_rows(const FieldSet& f, Vec3 center) {
    const GridSpec& g = f.phi.grid();
    const double h = g.spacing();
    std::vector<double> us, ps, cnt;
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                const auto bin = static_cast<std::size_t>(distance(g.cell_center(i, j, k), center) / h);
                if (bin >= us.size()) {
                    us.resize(bin + 1, 0.0);
                    ps.resize(bin + 1, 0.0);
                    cnt.resize(bin + 1, 0.0);
                }
                us[bin] += f.u.at(i, j, k);
                ps[bin] += f.phi.at(i, j, k);
                cnt[bin] += 1.0;
            }
        }
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < us.size(); ++b) {
        if (cnt[b] == 0.0) continue;
        rows.push_back({(static_cast<double>(b) + 0.5) * h, us[b] / cnt[b], ps[b] / cnt[b], cnt[b]});
    }
    return rows;
}

}  // namespace screen::cli
