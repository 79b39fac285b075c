#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numbers>

#include "screen/energy.hpp"
#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "test_support.hpp"

using namespace screen;
using screen::testing::centered_grid;

namespace {

constexpr double kPi = std::numbers::pi;

// Potential of the unit-density shell r1 < |x| < r2 at radius r, from the shell theorem.
double shell_potential(double r1, double r2, double r) {
    const double c = std::clamp(r, r1, r2);
    const double inside = 4.0 * kPi / 3.0 * (c * c * c - r1 * r1 * r1);
    return inside / (4.0 * kPi * r) + (r2 * r2 - c * c) / 2.0;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-13);
}

}  // namespace

TEST(Energy, AnnulusSelfEnergyMatchesQuadrature) {
    for (auto [r1, r2] : {std::pair{0.0, 1.0}, std::pair{1.0, 1.5}, std::pair{0.3, 2.2}}) {
        const double e = integrate([&](double r) { return 4.0 * kPi * r * r * shell_potential(r1, r2, r); }, r1, r2);
        EXPECT_NEAR(annulus_self_energy(r1, r2), e, 1e-10 * e);
    }
    EXPECT_NEAR(annulus_self_energy(0.0, 1.0), 8.0 * kPi / 15.0, 1e-14);
    EXPECT_THROW(annulus_self_energy(2.0, 1.0), PreconditionError);
}

TEST(Energy, InteractionMatchesQuadrature) {
    const double R1 = 0.5, R2 = 1.0, r1 = 1.2, r2 = 1.7;
    const double e =
        integrate([&](double s) { return 4.0 * kPi * s * s * shell_potential(R1, R2, s); }, r1, r2);
    EXPECT_NEAR(annuli_interaction_energy(R1, R2, r1, r2), e, 1e-10 * e);
    EXPECT_THROW(annuli_interaction_energy(0.5, 1.3, 1.2, 1.7), PreconditionError);
}

TEST(Energy, RasterBallSelfEnergyConverges) {
    const ScalarField ball = rasterize(DomainSpec::ball({}, 1.0), centered_grid(40, 1.0 / 16.0));
    const EnergyReport r = energy_of_pair(ball, ScalarField(ball.grid(), 0.0));
    EXPECT_NEAR(r.total, 8.0 * kPi / 15.0, 2e-3 * r.total);
    EXPECT_EQ(r.self_minus, 0.0);
    EXPECT_EQ(r.cross, 0.0);
    ASSERT_TRUE(r.grid_h.has_value());
    EXPECT_DOUBLE_EQ(*r.grid_h, 1.0 / 16.0);
}

TEST(Energy, BreakdownIsConsistent) {
    const GridSpec g = centered_grid(16, 0.125);
    const ScalarField a = screen::testing::random_field(g, 3), b = screen::testing::random_field(g, 4);
    const EnergyReport r = energy_of_pair(a, b);
    EXPECT_NEAR(r.total, r.self_plus + r.self_minus - 2.0 * r.cross, 1e-12 * r.self_plus);
    // Net energy is the squared H^-1 norm, so it is nonnegative.
    EXPECT_GE(r.total, 0.0);
    EXPECT_NEAR(energy_of_pair(a, a).total, 0.0, 1e-12 * r.self_plus);
}

TEST(Energy, DirichletFormMatchesKernelFormForCompactPotentials) {
    // Exact annulus around the ball: the net potential vanishes outside, so nothing is lost to the box.
    const GridSpec g = centered_grid(48, 1.0 / 16.0);
    const ScalarField plus = rasterize(DomainSpec::ball({}, 1.0), g);
    const ScalarField minus = rasterize(DomainSpec::annulus({}, 1.0, std::cbrt(2.0)), g);
    ScalarField net(g);
    for (std::size_t n = 0; n < net.size(); ++n) net[n] = plus[n] - minus[n];
    const double kernel = energy_of_pair(plus, minus).total;
    EXPECT_NEAR(dirichlet_energy(potential_fft(net)), kernel, 0.03 * kernel);
}

TEST(Energy, PairEnergyIsSymmetric) {
    const std::vector<Vec3> x = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
    const std::vector<double> a = {1, 2, 3}, b = {0.5, -1, 4};
    EXPECT_NEAR(pair_energy(x, a, b), pair_energy(x, b, a), 1e-15);
    EXPECT_NEAR(pair_energy(x, {1, 1, 0}, {1, 1, 0}), 2.0 / (4.0 * kPi), 1e-15);
    EXPECT_THROW(pair_energy(x, {1}, b), PreconditionError);
}

TEST(Energy, MeasureEnergyRejectsInteriorNodes) {
    SurfaceMeasure mu;
    mu.nodes = {{0, 0, 0.5}};
    mu.weights = {1.0};
    mu.masses = {1.0};
    EXPECT_THROW(measure_energy(mu, DomainSpec::ball({}, 1.0)), PreconditionError);
}
