#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <numbers>

#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "test_support.hpp"

using namespace screen;
using screen::testing::centered_grid;
using screen::testing::random_field;

namespace {

double inner(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    return s;
}

}  // namespace

TEST(Kernel, UnitCubeIntegralMatchesIndependentQuadrature) {
    // 48 symmetric wedges 0 <= z <= y <= x <= 1/2; with y = x s, z = x s t the radial factor
    // integrates to 1/8 and leaves a smooth integrand on the unit square.
    using boost::math::quadrature::gauss;
    const double wedge = gauss<double, 30>::integrate(
        [](double s) {
            return gauss<double, 30>::integrate([s](double t) { return s / std::sqrt(1.0 + s * s + s * s * t * t); },
                                                0.0, 1.0);
        },
        0.0, 1.0);
    EXPECT_NEAR(KernelTable::unit_cube_inverse_distance_integral(), 6.0 * wedge, 1e-12);
}

TEST(Kernel, SelfValueIsTheCellAverage) {
    const GridSpec g = centered_grid(8, 0.1);
    const KernelTable k(g);
    EXPECT_NEAR(k.self_value(), KernelTable::unit_cube_inverse_distance_integral() / (4.0 * std::numbers::pi * 0.1),
                1e-12);
    EXPECT_NEAR(k.value(1, 2, 2), 1.0 / (4.0 * std::numbers::pi * 0.3), 1e-12);
    EXPECT_EQ(k.value(0, 0, 0), k.self_value());
}

TEST(Newtonian, FftMatchesDirectSummation) {
    for (unsigned seed : {1u, 2u, 3u}) {
        const ScalarField w = random_field(centered_grid(16, 1.0 / 16.0), seed, -1.0, 1.0);
        const ScalarField a = potential_fft(w), b = potential_direct(w);
        double err = 0.0, scale = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) {
            err = std::max(err, std::abs(a[n] - b[n]));
            scale = std::max(scale, std::abs(b[n]));
        }
        EXPECT_LE(err, 1e-10 * scale);
    }
}

TEST(Newtonian, FftMatchesDirectOnNonCubicGrids) {
    const ScalarField w = random_field(GridSpec({0, 0, 0}, 0.1, {12, 7, 9}), 5);
    const ScalarField a = potential_fft(w), b = potential_direct(w);
    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-12 * std::abs(b[n]) + 1e-14);
}

TEST(Newtonian, OperatorIsSymmetricAndPositive) {
    const GridSpec g = centered_grid(12, 0.1);
    const ScalarField u = random_field(g, 7), v = random_field(g, 8, -1.0, 1.0);
    NewtonianOperator op(g);
    const ScalarField ku = op.apply(u), kv = op.apply(v);
    EXPECT_NEAR(inner(ku, v), inner(u, kv), 1e-12 * std::abs(inner(ku, v)));
    EXPECT_GT(inner(kv, v), 0.0);
    EXPECT_GT(ku.min(), 0.0);
}

TEST(Newtonian, ThreadCountDoesNotChangeResults) {
    const ScalarField w = random_field(centered_grid(16, 0.1), 9);
    set_fft_threads(1);
    const ScalarField a = potential_fft(w);
    set_fft_threads(2);
    const ScalarField b = potential_fft(w);
    set_fft_threads(1);
    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-13 * std::abs(a[n]));
}

TEST(Newtonian, RasterBallFarFieldIsAPointCharge) {
    const GridSpec g = centered_grid(64, 1.0 / 16.0);
    const auto ball = DomainSpec::ball({}, 1.0);
    const ScalarField w = rasterize(ball, g);
    const ScalarField phi = potential_fft(w);
    for (double r : {1.5, 1.9}) {
        EXPECT_NEAR(phi.interpolate({r, 0, 0}), w.integral() / (4.0 * std::numbers::pi * r), 2e-3);
    }
    EXPECT_NEAR(phi.interpolate({0, 0, 0}), 0.5, 5e-3);
}

TEST(Newtonian, DirectSummationRefusesLargeGrids) {
    EXPECT_THROW(potential_direct(ScalarField(centered_grid(40, 0.1))), ResourceError);
}

TEST(RadialPotential, UniformBallClosedForms) {
    const auto q = [](double r) { return 4.0 * std::numbers::pi / 3.0 * std::pow(std::min(r, 1.0), 3); };
    const double brk[] = {1.0};
    EXPECT_NEAR(radial_potential(q, 0.0, 1.0, brk), 0.5, 1e-10);
    EXPECT_NEAR(radial_potential(q, 0.5, 1.0, brk), (3.0 - 0.25) / 6.0, 1e-10);
    EXPECT_NEAR(radial_potential(q, 3.0, 1.0, brk), 1.0 / 9.0, 1e-10);
}

TEST(RadialPotential, NonMonotoneChargeNeedsSignedMode) {
    const auto q = [](double r) { return r < 1.0 ? r : std::max(0.0, 2.0 - r); };
    EXPECT_THROW(radial_potential(q, 0.5, 2.0), PreconditionError);
    EXPECT_NO_THROW(radial_potential(q, 0.5, 2.0, {}, RadialCharge::signed_net));
}

TEST(UniformPotential, BallAndAnnulusAgreeWithShellTheorem) {
    const auto b = DomainSpec::ball({1, 0, 0}, 2.0);
    EXPECT_NEAR(uniform_potential(b, {1, 1, 0}), (3.0 * 4.0 - 1.0) / 6.0, 1e-12);
    EXPECT_NEAR(uniform_potential(b, {1, 0, 4}), 8.0 / 12.0, 1e-12);
    // Annulus = big ball minus small ball.
    const auto a = DomainSpec::annulus({}, 1.0, 2.0);
    const Vec3 x{0, 0.5, 0};
    EXPECT_NEAR(uniform_potential(a, x),
                uniform_potential(DomainSpec::ball({}, 2.0), x) - uniform_potential(DomainSpec::ball({}, 1.0), x), 1e-12);
}

TEST(SphereAverage, ConstantField) {
    const ScalarField c(centered_grid(16, 0.25), 3.0);
    EXPECT_NEAR(sphere_average(c, {}, 1.0), 3.0, 1e-12);
    EXPECT_NEAR(sphere_average(c, {}, 1.0, SphereForm::integral), 12.0 * std::numbers::pi, 1e-10);
    EXPECT_THROW(sphere_average(c, {}, 1.9), DomainError);
}
