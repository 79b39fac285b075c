#include "screen/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"

namespace screen {

ScalarField dilate(const ScalarField& mask, double shells) {
    const GridSpec& g = mask.grid();
    const int s = static_cast<int>(std::floor(shells));
    const double s2 = shells * shells;
    std::vector<Index3> stencil;
    for (int dk = -s; dk <= s; ++dk)
        for (int dj = -s; dj <= s; ++dj)
            for (int di = -s; di <= s; ++di)
                if (di * di + dj * dj + dk * dk <= s2 + 1e-9) stencil.push_back({di, dj, dk});
    ScalarField out(g, 0.0);
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                if (mask.at(i, j, k) <= 0.5) continue;
                for (const Index3& d : stencil) {
                    const int a = i + d[0], b = j + d[1], c = k + d[2];
                    if (a < 0 || b < 0 || c < 0 || a >= g.dim(0) || b >= g.dim(1) || c >= g.dim(2)) continue;
                    out.at(a, b, c) = 1.0;
                }
            }
        }
    }
    return out;
}

double verify_screening(const ScalarField& phi, const ScalarField& omega_plus_mask, const ScalarField& omega_minus_mask,
                        int exclusion_shells) {
    require_same_grid(phi, omega_plus_mask, "verify_screening");
    require_same_grid(phi, omega_minus_mask, "verify_screening");
    if (exclusion_shells < 0) throw PreconditionError("verify_screening: exclusion_shells must be >= 0");
    const double top = phi.max();
    if (!(top > 0.0)) return 0.0;
    ScalarField both(phi.grid(), 0.0);
    for (std::size_t n = 0; n < both.size(); ++n) {
        both[n] = (omega_plus_mask[n] > 0.5 || omega_minus_mask[n] > 0.5) ? 1.0 : 0.0;
    }
    const ScalarField near = dilate(both, exclusion_shells);
    double worst = 0.0;
    for (std::size_t n = 0; n < phi.size(); ++n) {
        if (near[n] < 0.5) worst = std::max(worst, std::abs(phi[n]));
    }
    return worst / top;
}

double verify_neutrality(const ChargeDensity& u, double m) {
    if (!(m > 0.0)) throw PreconditionError("verify_neutrality: m must be positive");
    return std::abs(u.mass - m) / m;
}

SupportBounds verify_support_bounds(const ScalarField& omega_minus_mask, const DomainSpec& omega_plus) {
    if (!omega_plus.is_analytic()) throw UnsupportedError("verify_support_bounds: omega_plus must be analytic");
    const GridSpec& g = omega_minus_mask.grid();
    const double h = g.spacing();
    SupportBounds out;
    out.distance_bound = 2.0 * std::cbrt(omega_plus.volume());
    out.diameter_bound = 1.0 + 2.0 * std::sqrt(3.0);

    ScalarField minus(g, 0.0);
    std::vector<double> sd(g.size());
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                const std::size_t n = g.index(i, j, k);
                sd[n] = omega_plus.signed_distance(g.cell_center(i, j, k));
                if (omega_minus_mask[n] > 0.5 && sd[n] >= 0.0) minus[n] = 1.0;
            }
        }
    }

    const Labeling lab = connected_components(minus);
    out.components = lab.count;
    if (lab.count == 0) return out;
    out.empty = false;

    std::vector<char> touching(static_cast<std::size_t>(lab.count) + 1, 0);
    const auto& dirs = fibonacci_sphere(256);
    std::vector<double> lo(dirs.size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(dirs.size(), -std::numeric_limits<double>::infinity());
    // Cells cut by the boundary of omega_plus belong to neither side.
    const double cut = 0.5 * std::sqrt(3.0) * h;
    double max_dist = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (minus[n] > 0.5) {
            max_dist = std::max(max_dist, sd[n]);
            if (sd[n] <= 2.0 * h) touching[static_cast<std::size_t>(lab.labels[n])] = 1;
            const auto idx = g.unravel(n);
            const Vec3 x = g.cell_center(idx[0], idx[1], idx[2]);
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                const double p = dot(x, dirs[d]);
                lo[d] = std::min(lo[d], p);
                hi[d] = std::max(hi[d], p);
            }
        } else if (sd[n] > cut) {
            gap = std::min(gap, sd[n]);  // uncharged cell clear of omega_plus
        }
    }
    double width = 0.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) width = std::max(width, hi[d] - lo[d]);
    out.max_distance = max_dist;
    // Centre-to-centre extents plus one cell for the cells themselves.
    out.diameter_ratio = (width + h) / omega_plus.diameter();
    out.touching_components = static_cast<int>(std::count(touching.begin() + 1, touching.end(), 1));
    out.gap_omega0 = std::isfinite(gap) ? gap : -1.0;
    return out;
}

FluxCheck verify_flux(const ScalarField& phi, Vec3 center, double radius, double expected_lambda_r, double m) {
    FluxCheck out;
    out.radius = radius;
    out.expected = expected_lambda_r;
    out.measured = sphere_average(phi, center, radius, SphereForm::integral);
    out.error = std::abs(out.measured - expected_lambda_r) / (std::abs(expected_lambda_r) + m * radius);
    return out;
}

double expected_sphere_integral(const ScalarField& w, Vec3 center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("expected_sphere_integral: radius must be positive");
    const GridSpec& g = w.grid();
    double inside = 0.0, outside = 0.0;
    for (int k = 0; k < g.dim(2); ++k) {
        for (int j = 0; j < g.dim(1); ++j) {
            for (int i = 0; i < g.dim(0); ++i) {
                const double v = w.at(i, j, k);
                if (v == 0.0) continue;
                const double r = distance(g.cell_center(i, j, k), center);
                if (r < radius) {
                    inside += v;
                } else {
                    outside += v / r;
                }
            }
        }
    }
    const double h3 = g.cell_volume();
    return radius * inside * h3 + radius * radius * outside * h3;
}

const std::vector<Vec3>& min_diam_directions() {
    static const std::vector<Vec3> dirs = [] {
        const double p = std::numbers::phi;
        std::vector<Vec3> raw = {
            {1, 0, 0},  {0, 1, 0},  {0, 0, 1},                                      // axes
            {0, 1, p},  {0, 1, -p}, {1, p, 0}, {1, -p, 0}, {p, 0, 1}, {-p, 0, 1},  // icosahedron vertices
            {1, 1, 1},  {1, 1, -1}, {1, -1, 1}, {-1, 1, 1},                        // cube diagonals
            {1, 1, 0},  {1, 0, 1},  {0, 1, 1},                                      // face diagonals
        };
        for (Vec3& v : raw) v = (1.0 / norm(v)) * v;
        return raw;
    }();
    return dirs;
}

std::vector<MinDiamSample> min_diam_indicator(const ScalarField& phi, Vec3 x0, const std::vector<double>& radii,
                                              double theta) {
    const GridSpec& g = phi.grid();
    const Vec3 bmin = g.box_min(), bmax = g.box_max();
    const auto& dirs = min_diam_directions();
    std::vector<MinDiamSample> out;
    for (double r : radii) {
        if (!(r > 0.0)) throw PreconditionError("min_diam_indicator: radii must be positive");
        for (int a = 0; a < 3; ++a) {
            if (x0[a] - r < bmin[a] || x0[a] + r > bmax[a]) throw DomainError("min_diam_indicator: ball leaves the grid box");
        }
        std::vector<double> lo(dirs.size(), std::numeric_limits<double>::infinity());
        std::vector<double> hi(dirs.size(), -std::numeric_limits<double>::infinity());
        int cells = 0;
        const double h = g.spacing();
        const int i0 = std::max(0, static_cast<int>(std::floor((x0.x - r - g.origin().x) / h)));
        const int j0 = std::max(0, static_cast<int>(std::floor((x0.y - r - g.origin().y) / h)));
        const int k0 = std::max(0, static_cast<int>(std::floor((x0.z - r - g.origin().z) / h)));
        const int i1 = std::min(g.dim(0) - 1, static_cast<int>(std::ceil((x0.x + r - g.origin().x) / h)));
        const int j1 = std::min(g.dim(1) - 1, static_cast<int>(std::ceil((x0.y + r - g.origin().y) / h)));
        const int k1 = std::min(g.dim(2) - 1, static_cast<int>(std::ceil((x0.z + r - g.origin().z) / h)));
        for (int k = k0; k <= k1; ++k) {
            for (int j = j0; j <= j1; ++j) {
                for (int i = i0; i <= i1; ++i) {
                    const Vec3 d = g.cell_center(i, j, k) - x0;
                    if (norm(d) > r || phi.at(i, j, k) > theta) continue;
                    ++cells;
                    for (std::size_t q = 0; q < dirs.size(); ++q) {
                        const double p = dot(d, dirs[q]);
                        lo[q] = std::min(lo[q], p);
                        hi[q] = std::max(hi[q], p);
                    }
                }
            }
        }
        double width = 0.0;
        if (cells > 0) {
            width = std::numeric_limits<double>::infinity();
            for (std::size_t q = 0; q < dirs.size(); ++q) width = std::min(width, hi[q] - lo[q]);
        }
        out.push_back({r, width / r, cells});
    }
    return out;
}

MinDiamSample smallest_resolvable(const std::vector<MinDiamSample>& samples, int min_cells) {
    const MinDiamSample* best = nullptr;
    for (const MinDiamSample& s : samples) {
        if (s.cells >= min_cells && (best == nullptr || s.radius < best->radius)) best = &s;
    }
    return best != nullptr ? *best : MinDiamSample{};
}

bool singular_like(const std::vector<MinDiamSample>& samples, int min_cells) {
    const MinDiamSample s = smallest_resolvable(samples, min_cells);
    return s.cells > 0 && s.ratio < 0.2;
}

InterfaceRadii interface_radii(const ScalarField& field, Vec3 center, double level, double r_max, int rays) {
    const double step = 0.25 * field.grid().spacing();
    InterfaceRadii out;
    std::vector<std::vector<double>> hits;
    for (const Vec3& d : fibonacci_sphere(rays)) {
        std::vector<double> crossings;
        double prev = field.interpolate(center) - level;
        for (double r = step; r <= r_max + 1e-12; r += step) {
            const double cur = field.interpolate(center + r * d) - level;
            if ((prev > 0.0) != (cur > 0.0)) crossings.push_back(r - step + step * prev / (prev - cur));
            prev = cur;
        }
        hits.push_back(std::move(crossings));
    }
    out.consistent = std::all_of(hits.begin(), hits.end(), [&](const auto& c) { return c.size() == hits.front().size(); });
    if (!out.consistent || hits.empty()) return out;
    const std::size_t count = hits.front().size();
    out.radii.assign(count, 0.0);
    for (const auto& c : hits)
        for (std::size_t q = 0; q < count; ++q) out.radii[q] += c[q] / static_cast<double>(hits.size());
    for (const auto& c : hits)
        for (std::size_t q = 0; q < count; ++q) out.spread = std::max(out.spread, std::abs(c[q] - out.radii[q]));
    return out;
}

ScalarField density_phase(const ScalarField& u, const ScalarField& omega_plus) {
    require_same_grid(u, omega_plus, "density_phase");
    ScalarField out(u.grid(), 0.0);
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double cap = 1.0 - omega_plus[n];
        out[n] = (omega_plus[n] < 0.5 && u[n] > 0.5 * cap) ? 1.0 : 0.0;
    }
    return out;
}

double symmetric_difference(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "symmetric_difference");
    double count = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) count += ((a[n] > 0.5) != (b[n] > 0.5)) ? 1.0 : 0.0;
    return count * a.grid().cell_volume();
}

}  // namespace screen
