#include "screen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

#include "screen/error.hpp"

namespace screen {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Centre and outer radius of an analytic leaf.
struct Sphere {
    Vec3 center;
    double r_in;
    double r_out;
};

Sphere leaf_sphere(const DomainSpec& leaf) {
    return std::visit(Overloaded{[](const Ball& b) { return Sphere{b.center, 0.0, b.radius}; },
                                 [](const Annulus& a) { return Sphere{a.center, a.r_inner, a.r_outer}; },
                                 [](const auto&) -> Sphere { throw PreconditionError("not an analytic leaf"); }},
                      leaf.shape());
}

bool leaves_disjoint(const Sphere& a, const Sphere& b) {
    if (a.center == b.center) return a.r_out <= b.r_in || b.r_out <= a.r_in;
    return distance(a.center, b.center) >= a.r_out + b.r_out;
}

}  // namespace

bool Box::contains(const Box& other) const {
    for (int a = 0; a < 3; ++a) {
        if (other.lo[a] < lo[a] || other.hi[a] > hi[a]) return false;
    }
    return true;
}

Box Box::inflated(double by) const {
    const Vec3 d{by, by, by};
    return {lo - d, hi + d};
}

DomainSpec DomainSpec::ball(Vec3 center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("Ball: radius must be positive");
    return DomainSpec(Ball{center, radius});
}

DomainSpec DomainSpec::annulus(Vec3 center, double r_inner, double r_outer) {
    if (!(r_inner >= 0.0) || !(r_inner < r_outer) || !std::isfinite(r_outer)) {
        throw PreconditionError("Annulus: need 0 <= r_inner < r_outer");
    }
    return DomainSpec(Annulus{center, r_inner, r_outer});
}

DomainSpec DomainSpec::union_of(std::vector<DomainSpec> parts) { return DomainSpec(UnionOf{std::move(parts)}); }

DomainSpec DomainSpec::voxels(ScalarField mask) {
    for (double v : mask.values()) {
        if (v != 0.0 && v != 1.0) throw PreconditionError("VoxelMask: values must be 0 or 1");
    }
    return DomainSpec(VoxelMask{std::move(mask)});
}

bool DomainSpec::is_analytic() const {
    return std::visit(Overloaded{[](const VoxelMask&) { return false; },
                                 [](const UnionOf& u) {
                                     return std::all_of(u.parts.begin(), u.parts.end(),
                                                        [](const DomainSpec& d) { return d.is_analytic(); });
                                 },
                                 [](const auto&) { return true; }},
                      shape_);
}

bool DomainSpec::empty() const {
    return std::visit(Overloaded{[](const UnionOf& u) {
                                     return std::all_of(u.parts.begin(), u.parts.end(),
                                                        [](const DomainSpec& d) { return d.empty(); });
                                 },
                                 [](const VoxelMask& m) { return m.field.max() <= 0.0; },
                                 [](const auto&) { return false; }},
                      shape_);
}

std::vector<DomainSpec> DomainSpec::leaves() const {
    std::vector<DomainSpec> out;
    std::visit(Overloaded{[&](const UnionOf& u) {
                              for (const auto& p : u.parts) {
                                  auto sub = p.leaves();
                                  out.insert(out.end(), sub.begin(), sub.end());
                              }
                          },
                          [](const VoxelMask&) {}, [&](const auto&) { out.push_back(*this); }},
               shape_);
    return out;
}

double DomainSpec::volume() const {
    return std::visit(
        Overloaded{[](const Ball& b) { return 4.0 * kPi / 3.0 * b.radius * b.radius * b.radius; },
                   [](const Annulus& a) {
                       return 4.0 * kPi / 3.0 * (std::pow(a.r_outer, 3) - std::pow(a.r_inner, 3));
                   },
                   [](const VoxelMask& m) { return m.field.integral(); },
                   [this](const UnionOf& u) {
                       double sum = 0.0;
                       bool has_voxels = false;
                       for (const auto& p : u.parts) {
                           if (!p.is_analytic()) has_voxels = true;
                       }
                       const auto lv = leaves();
                       bool disjoint = !has_voxels;
                       for (std::size_t i = 0; disjoint && i < lv.size(); ++i) {
                           for (std::size_t j = i + 1; disjoint && j < lv.size(); ++j) {
                               disjoint = leaves_disjoint(leaf_sphere(lv[i]), leaf_sphere(lv[j]));
                           }
                       }
                       if (disjoint) {
                           for (const auto& l : lv) sum += l.volume();
                           return sum;
                       }
                       // Overlapping or mixed union: fine stratified estimate.
                       const auto bb = bounds();
                       if (!bb) return 0.0;
                       const Vec3 e = bb->extent();
                       const double side = std::max({e.x, e.y, e.z});
                       const GridSpec g = grid_for_box(bb->inflated(side / 64.0), side / 128.0, false);
                       return rasterize(*this, g, 4).integral();
                   }},
        shape_);
}

bool DomainSpec::contains(Vec3 p) const {
    return std::visit(Overloaded{[&](const Ball& b) { return distance(p, b.center) < b.radius; },
                                 [&](const Annulus& a) {
                                     const double r = distance(p, a.center);
                                     return r > a.r_inner && r < a.r_outer;
                                 },
                                 [&](const UnionOf& u) {
                                     return std::any_of(u.parts.begin(), u.parts.end(),
                                                        [&](const DomainSpec& d) { return d.contains(p); });
                                 },
                                 [&](const VoxelMask& m) {
                                     const GridSpec& g = m.field.grid();
                                     int idx[3];
                                     for (int a = 0; a < 3; ++a) {
                                         idx[a] = static_cast<int>(std::floor((p[a] - g.origin()[a]) / g.spacing()));
                                         if (idx[a] < 0 || idx[a] >= g.dim(a)) return false;
                                     }
                                     return m.field.at(idx[0], idx[1], idx[2]) > 0.5;
                                 }},
                      shape_);
}

double DomainSpec::signed_distance(Vec3 p) const {
    return std::visit(Overloaded{[&](const Ball& b) { return distance(p, b.center) - b.radius; },
                                 [&](const Annulus& a) {
                                     const double r = distance(p, a.center);
                                     return std::max(a.r_inner - r, r - a.r_outer);
                                 },
                                 [&](const UnionOf& u) {
                                     double d = std::numeric_limits<double>::infinity();
                                     for (const auto& part : u.parts) d = std::min(d, part.signed_distance(p));
                                     return d;
                                 },
                                 [&](const VoxelMask&) -> double {
                                     throw UnsupportedError("signed_distance: voxel masks have no analytic distance");
                                 }},
                      shape_);
}

std::optional<Box> DomainSpec::bounds() const {
    return std::visit(
        Overloaded{[](const Ball& b) -> std::optional<Box> {
                       const Vec3 r{b.radius, b.radius, b.radius};
                       return Box{b.center - r, b.center + r};
                   },
                   [](const Annulus& a) -> std::optional<Box> {
                       const Vec3 r{a.r_outer, a.r_outer, a.r_outer};
                       return Box{a.center - r, a.center + r};
                   },
                   [](const UnionOf& u) -> std::optional<Box> {
                       std::optional<Box> acc;
                       for (const auto& p : u.parts) {
                           const auto b = p.bounds();
                           if (!b) continue;
                           if (!acc) {
                               acc = b;
                               continue;
                           }
                           for (int a = 0; a < 3; ++a) {
                               acc->lo[a] = std::min(acc->lo[a], b->lo[a]);
                               acc->hi[a] = std::max(acc->hi[a], b->hi[a]);
                           }
                       }
                       return acc;
                   },
                   [](const VoxelMask& m) -> std::optional<Box> {
                       const GridSpec& g = m.field.grid();
                       std::optional<Box> acc;
                       const double h = g.spacing();
                       for (std::size_t n = 0; n < g.size(); ++n) {
                           if (m.field[n] <= 0.5) continue;
                           const auto [i, j, k] = g.unravel(n);
                           const Vec3 c = g.cell_center(i, j, k);
                           const Vec3 half{0.5 * h, 0.5 * h, 0.5 * h};
                           const Box cell{c - half, c + half};
                           if (!acc) {
                               acc = cell;
                               continue;
                           }
                           for (int a = 0; a < 3; ++a) {
                               acc->lo[a] = std::min(acc->lo[a], cell.lo[a]);
                               acc->hi[a] = std::max(acc->hi[a], cell.hi[a]);
                           }
                       }
                       return acc;
                   }},
        shape_);
}

double DomainSpec::diameter() const {
    if (const auto* m = std::get_if<VoxelMask>(&shape_)) {
        // Farthest pair of occupied cell corners is bounded by the box diagonal; use cell centres
        // of boundary cells plus one cell diagonal.
        const GridSpec& g = m->field.grid();
        std::vector<Vec3> pts;
        for (std::size_t n = 0; n < g.size(); ++n) {
            if (m->field[n] > 0.5) {
                const auto [i, j, k] = g.unravel(n);
                pts.push_back(g.cell_center(i, j, k));
            }
        }
        double d = 0.0;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            for (std::size_t b = a + 1; b < pts.size(); ++b) d = std::max(d, distance(pts[a], pts[b]));
        }
        return pts.empty() ? 0.0 : d + std::sqrt(3.0) * g.spacing();
    }
    const auto lv = leaves();
    double d = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        const Sphere a = leaf_sphere(lv[i]);
        d = std::max(d, 2.0 * a.r_out);
        for (std::size_t j = i + 1; j < lv.size(); ++j) {
            const Sphere b = leaf_sphere(lv[j]);
            d = std::max(d, distance(a.center, b.center) + a.r_out + b.r_out);
        }
    }
    return d;
}

ScalarField rasterize(const DomainSpec& domain, const GridSpec& grid, int subsamples) {
    if (subsamples < 1) throw PreconditionError("rasterize: subsamples must be >= 1");
    if (const auto* m = std::get_if<VoxelMask>(&domain.shape())) {
        if (!(m->field.grid() == grid)) {
            throw DomainError("rasterize: voxel mask grid differs from the target grid");
        }
        return m->field;
    }
    ScalarField out(grid, 0.0);
    const auto bb = domain.bounds();
    if (!bb) return out;

    const Box gbox{grid.box_min(), grid.box_max()};
    if (!gbox.contains(*bb)) {
        std::ostringstream os;
        os << "rasterize: domain extent [" << bb->lo.x << ", " << bb->hi.x << "] x [" << bb->lo.y << ", "
           << bb->hi.y << "] x [" << bb->lo.z << ", " << bb->hi.z << "] exceeds grid box [" << gbox.lo.x << ", "
           << gbox.hi.x << "] x [" << gbox.lo.y << ", " << gbox.hi.y << "] x [" << gbox.lo.z << ", " << gbox.hi.z
           << "]";
        throw DomainError(os.str());
    }

    const double h = grid.spacing();
    const double half_diag = 0.5 * std::sqrt(3.0) * h;
    const int s = subsamples;
    const double inv_count = 1.0 / (static_cast<double>(s) * s * s);

    // Only cells overlapping the bounding box can be occupied.
    int lo[3];
    int hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((bb->lo[a] - grid.origin()[a]) / h)) - 1);
        hi[a] = std::min(grid.dim(a) - 1, static_cast<int>(std::ceil((bb->hi[a] - grid.origin()[a]) / h)) + 1);
    }
    for (int k = lo[2]; k <= hi[2]; ++k) {
        for (int j = lo[1]; j <= hi[1]; ++j) {
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const Vec3 c = grid.cell_center(i, j, k);
                const double sd = domain.signed_distance(c);
                if (sd >= half_diag) continue;
                if (sd <= -half_diag) {
                    out.at(i, j, k) = 1.0;
                    continue;
                }
                int hits = 0;
                for (int c2 = 0; c2 < s; ++c2) {
                    for (int c1 = 0; c1 < s; ++c1) {
                        for (int c0 = 0; c0 < s; ++c0) {
                            const Vec3 p{c.x + ((c0 + 0.5) / s - 0.5) * h, c.y + ((c1 + 0.5) / s - 0.5) * h,
                                         c.z + ((c2 + 0.5) / s - 0.5) * h};
                            hits += domain.contains(p) ? 1 : 0;
                        }
                    }
                }
                out.at(i, j, k) = hits * inv_count;
            }
        }
    }
    return out;
}

Box suggested_box(const DomainSpec& omega_plus, double margin) {
    if (margin < 0.0) throw PreconditionError("suggested_box: margin must be >= 0");
    const auto bb = omega_plus.bounds();
    if (!bb || omega_plus.empty()) throw PreconditionError("suggested_box: omega_plus is empty");
    const double reach = 2.0 * std::cbrt(omega_plus.volume());
    return bb->inflated(reach + margin);
}

Box working_box(const DomainSpec& omega_plus, double reach) {
    if (!(reach > 0.0)) throw PreconditionError("working_box: reach must be positive");
    const auto bb = omega_plus.bounds();
    if (!bb || omega_plus.empty()) throw PreconditionError("working_box: omega_plus is empty");
    return bb->inflated(reach * std::cbrt(omega_plus.volume()));
}

namespace {

int next_smooth(int n) {
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

}  // namespace

GridSpec grid_for_box(const Box& box, double h, bool fft_friendly) {
    if (!(h > 0.0)) throw PreconditionError("grid_for_box: spacing must be positive");
    Index3 dims{};
    Vec3 origin;
    const Vec3 c = box.center();
    const Vec3 e = box.extent();
    for (int a = 0; a < 3; ++a) {
        int n = std::max(4, static_cast<int>(std::ceil(e[a] / h - 1e-9)));
        if (fft_friendly) n = next_smooth(n);
        dims[static_cast<std::size_t>(a)] = n;
        origin[a] = c[a] - 0.5 * n * h;
    }
    return GridSpec(origin, h, dims);
}

Labeling connected_components(const ScalarField& mask) {
    const GridSpec& g = mask.grid();
    Labeling out;
    out.labels.assign(g.size(), 0);
    const int nx = g.dim(0), ny = g.dim(1), nz = g.dim(2);
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < g.size(); ++seed) {
        if (mask[seed] <= 0.5 || out.labels[seed] != 0) continue;
        const int label = ++out.count;
        out.labels[seed] = label;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            const auto [i, j, k] = g.unravel(cur);
            const int nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k},
                                  {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
            for (const auto& n : nb) {
                if (n[0] < 0 || n[0] >= nx || n[1] < 0 || n[1] >= ny || n[2] < 0 || n[2] >= nz) continue;
                const std::size_t idx = g.index(n[0], n[1], n[2]);
                if (mask[idx] > 0.5 && out.labels[idx] == 0) {
                    out.labels[idx] = label;
                    queue.push_back(idx);
                }
            }
        }
    }
    return out;
}

ScalarField threshold_mask(const ScalarField& field, double threshold) {
    ScalarField out(field.grid(), 0.0);
    for (std::size_t n = 0; n < field.size(); ++n) out[n] = field[n] > threshold ? 1.0 : 0.0;
    return out;
}

std::vector<Vec3> fibonacci_sphere(int n) {
    if (n < 1) throw PreconditionError("fibonacci_sphere: n must be >= 1");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double t = golden * i;
        pts.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    return pts;
}

}  // namespace screen
