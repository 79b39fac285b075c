#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include "screen/geometry.hpp"
#include "screen/grid.hpp"

namespace screen {

/// Samples of the free-space Green's function G(x) = 1/(4 pi |x|) at grid offsets. The
/// self value G(0) is the cell average of 1/(4 pi |x|) over one cubic cell.
class KernelTable {
public:
    explicit KernelTable(const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    double self_value() const { return self_value_; }
    /// G at the integer cell offset (di, dj, dk).
    double value(int di, int dj, int dk) const;

    /// Integral of 1/|x| over the unit cube centred at the origin (~2.38008).
    static double unit_cube_inverse_distance_integral();

private:
    GridSpec grid_;
    double self_value_;
};

/// Free-space discrete convolution phi = h^3 (G * w) via zero-padded FFTs on the doubled
/// grid. Owns its FFT plans and buffers; reuse one instance across iterations.
class NewtonianOperator {
public:
    explicit NewtonianOperator(const GridSpec& grid);
    ~NewtonianOperator();
    NewtonianOperator(NewtonianOperator&&) noexcept;
    NewtonianOperator& operator=(NewtonianOperator&&) noexcept;
    NewtonianOperator(const NewtonianOperator&) = delete;
    NewtonianOperator& operator=(const NewtonianOperator&) = delete;

    const GridSpec& grid() const;
    const KernelTable& kernel() const;

    void apply(std::span<const double> density, std::span<double> potential);
    ScalarField apply(const ScalarField& density);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Thread count used by subsequently created FFT plans (>= 1).
void set_fft_threads(int n);
int fft_threads();

/// phi(x) = int w(y) / (4 pi |x - y|) dy on the cell centres of w's grid.
ScalarField potential_fft(const ScalarField& w);

/// Direct O(N^2) summation with the same kernel; refuses grids above max_cells.
ScalarField potential_direct(const ScalarField& w, std::size_t max_cells = 32 * 32 * 32);

enum class RadialCharge {
    nonnegative,  // cumulative mass must be nondecreasing
    signed_net,   // net charge profile, no monotonicity requirement
};

/// phi(R) = (1/4pi) int_R^inf Q(r)/r^2 dr for a radial density with cumulative charge Q that
/// is constant beyond r_support. Breakpoints mark kinks of Q for the adaptive quadrature.
/// Absolute quadrature tolerance 1e-10.
double radial_potential(const std::function<double(double)>& cumulative, double radius, double r_support,
                        std::span<const double> breakpoints = {},
                        RadialCharge kind = RadialCharge::nonnegative);

/// Potential of the unit-density analytic domain (balls, annuli, disjoint unions of them).
double uniform_potential(const DomainSpec& domain, Vec3 x);

enum class SphereForm { average, integral };

/// Mean of the trilinear interpolant of phi over a Fibonacci sample of the sphere (or
/// 4 pi R^2 times it). Throws DomainError if the sphere leaves the cell-centre hull.
double sphere_average(const ScalarField& phi, Vec3 center, double radius, SphereForm form = SphereForm::average,
                      int samples = 2048);

}  // namespace screen
