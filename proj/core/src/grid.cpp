#include "screen/grid.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "screen/error.hpp"

namespace screen {

GridSpec::GridSpec(Vec3 origin, double spacing, Index3 dims) : origin_(origin), h_(spacing), dims_(dims) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw PreconditionError("GridSpec: spacing must be positive and finite");
    }
    for (int d : dims) {
        if (d < 4) {
            std::ostringstream os;
            os << "GridSpec: every dimension must be >= 4, got " << dims[0] << "x" << dims[1] << "x" << dims[2];
            throw PreconditionError(os.str());
        }
    }
}

Index3 GridSpec::unravel(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
}

bool GridSpec::interpolable(Vec3 p) const {
    for (int a = 0; a < 3; ++a) {
        const double lo = origin_[a] + 0.5 * h_;
        const double hi = origin_[a] + (dims_[static_cast<std::size_t>(a)] - 0.5) * h_;
        if (p[a] < lo || p[a] > hi) return false;
    }
    return true;
}

ScalarField::ScalarField(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw PreconditionError("ScalarField: value count does not match grid size");
    }
    if (!all_finite()) throw PreconditionError("ScalarField: values must be finite");
}

double ScalarField::integral() const {
    return grid_.cell_volume() * std::accumulate(values_.begin(), values_.end(), 0.0);
}

double ScalarField::max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

double ScalarField::min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::interpolate(Vec3 p) const {
    if (!grid_.interpolable(p)) {
        std::ostringstream os;
        os << "interpolate: point (" << p.x << ", " << p.y << ", " << p.z << ") outside the cell-centre hull";
        throw DomainError(os.str());
    }
    const double h = grid_.spacing();
    const Vec3 o = grid_.origin();
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double s = (p[a] - o[a]) / h - 0.5;
        int i0 = static_cast<int>(std::floor(s));
        i0 = std::clamp(i0, 0, grid_.dim(a) - 2);
        base[a] = i0;
        frac[a] = s - i0;
    }
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
        const double wz = dz ? frac[2] : 1.0 - frac[2];
        for (int dy = 0; dy < 2; ++dy) {
            const double wy = dy ? frac[1] : 1.0 - frac[1];
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? frac[0] : 1.0 - frac[0];
                acc += wx * wy * wz * at(base[0] + dx, base[1] + dy, base[2] + dz);
            }
        }
    }
    return acc;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw PreconditionError(std::string(what) + ": fields live on different grids");
    }
}

}  // namespace screen
