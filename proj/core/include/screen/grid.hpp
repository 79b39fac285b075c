#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace screen {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }
    double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

using Index3 = std::array<int, 3>;

/// Uniform cell-centred grid. Cell (i,j,k) has centre origin + (i+1/2, j+1/2, k+1/2) h
/// and the box is the product of [origin_k, origin_k + dims_k h].
class GridSpec {
public:
    GridSpec() = default;
    /// Throws PreconditionError unless h > 0 and every dim >= 4.
    GridSpec(Vec3 origin, double spacing, Index3 dims);

    Vec3 origin() const { return origin_; }
    double spacing() const { return h_; }
    Index3 dims() const { return dims_; }
    int dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    std::size_t size() const {
        return static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) *
               static_cast<std::size_t>(dims_[2]);
    }
    double cell_volume() const { return h_ * h_ * h_; }

    /// Row-major with x fastest.
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
    }
    Index3 unravel(std::size_t idx) const;

    Vec3 cell_center(int i, int j, int k) const {
        return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_, origin_.z + (k + 0.5) * h_};
    }
    Vec3 box_min() const { return origin_; }
    Vec3 box_max() const {
        return {origin_.x + dims_[0] * h_, origin_.y + dims_[1] * h_, origin_.z + dims_[2] * h_};
    }

    /// True when p lies in the hull of the cell centres, i.e. trilinear interpolation is defined.
    bool interpolable(Vec3 p) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    Vec3 origin_{};
    double h_ = 1.0;
    Index3 dims_{4, 4, 4};
};

/// A real field sampled at the cell centres of a grid.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid, double fill = 0.0);
    /// Throws PreconditionError on size mismatch or non-finite entries.
    ScalarField(const GridSpec& grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& storage() { return values_; }

    /// h^3 * sum of values.
    double integral() const;
    double max() const;
    double min() const;
    bool all_finite() const;

    /// Trilinear interpolation between cell centres; throws DomainError outside their hull.
    double interpolate(Vec3 p) const;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Throws PreconditionError if the two fields do not share a grid.
void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what);

}  // namespace screen
