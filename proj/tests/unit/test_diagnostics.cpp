#include <gtest/gtest.h>

#include <numbers>

#include "screen/diagnostics.hpp"
#include "screen/error.hpp"
#include "screen/newtonian.hpp"
#include "test_support.hpp"

using namespace screen;
using screen::testing::cbrt2;
using screen::testing::centered_grid;

namespace {

ScalarField field_of(const GridSpec& g, const std::function<double(Vec3)>& f) {
    ScalarField out(g);
    for (int k = 0; k < g.dim(2); ++k)
        for (int j = 0; j < g.dim(1); ++j)
            for (int i = 0; i < g.dim(0); ++i) out.at(i, j, k) = f(g.cell_center(i, j, k));
    return out;
}

}  // namespace

TEST(Screening, ZeroPotential) {
    const GridSpec g = centered_grid(16, 0.125);
    const ScalarField z(g, 0.0);
    EXPECT_EQ(verify_screening(z, z, z, 3), 0.0);
}

TEST(Screening, ExcludesCellsNearTheMasks) {
    const GridSpec g = centered_grid(20, 0.1);
    const ScalarField plus = threshold_mask(rasterize(DomainSpec::ball({}, 0.3), g), 0.5);
    const ScalarField none(g, 0.0);
    // phi equals 1 up to r = 0.5 and 0.1 beyond: outside the 3-shell dilation of the mask only 0.1 is seen.
    const ScalarField phi = field_of(g, [](Vec3 x) { return norm(x) < 0.5 ? 1.0 : 0.1; });
    EXPECT_NEAR(verify_screening(phi, plus, none, 3), 0.1, 1e-15);
    EXPECT_NEAR(verify_screening(phi, plus, none, 0), 1.0, 1e-15);
}

TEST(Neutrality, Basics) {
    const GridSpec g = centered_grid(8, 0.25);
    EXPECT_EQ(verify_neutrality(ChargeDensity{ScalarField(g, 0.0), 0.0, std::nullopt, nullptr}, 2.0), 1.0);
    EXPECT_NEAR(verify_neutrality(ChargeDensity{ScalarField(g, 0.0), 2.02, std::nullopt, nullptr}, 2.0), 0.01, 1e-15);
    EXPECT_THROW(verify_neutrality(ChargeDensity{}, 0.0), PreconditionError);
}

TEST(SupportBounds, AnalyticAnnulus) {
    const double h = 1.0 / 16.0;
    const GridSpec g = centered_grid(48, h);
    const auto ball = DomainSpec::ball({}, 1.0);
    const ScalarField minus = threshold_mask(rasterize(DomainSpec::annulus({}, 1.0, cbrt2()), g, 1), 0.5);
    const SupportBounds b = verify_support_bounds(minus, ball);
    EXPECT_FALSE(b.empty);
    EXPECT_NEAR(b.max_distance, cbrt2() - 1.0, h);
    EXPECT_NEAR(b.distance_bound, 2.0 * std::cbrt(4.0 * std::numbers::pi / 3.0), 1e-12);
    EXPECT_NEAR(b.diameter_ratio, cbrt2(), h);
    EXPECT_NEAR(b.diameter_bound, 1.0 + 2.0 * std::sqrt(3.0), 1e-14);
    EXPECT_EQ(b.touching_components, 1);
    EXPECT_EQ(b.components, 1);
    EXPECT_GT(b.gap_omega0, h);
}

TEST(SupportBounds, EmptyMaskGivesSentinels) {
    const GridSpec g = centered_grid(16, 0.25);
    const SupportBounds b = verify_support_bounds(ScalarField(g, 0.0), DomainSpec::ball({}, 1.0));
    EXPECT_TRUE(b.empty);
    EXPECT_EQ(b.components, 0);
    EXPECT_TRUE(std::isfinite(b.max_distance));
    EXPECT_TRUE(std::isfinite(b.gap_omega0));
}

TEST(SupportBounds, DetachedComponentIsCounted) {
    const double h = 1.0 / 8.0;
    const GridSpec g = centered_grid(40, h);
    const auto minus = DomainSpec::union_of(
        {DomainSpec::annulus({}, 1.0, cbrt2()), DomainSpec::ball({2.0, 0, 0}, 0.3)});
    const SupportBounds b = verify_support_bounds(threshold_mask(rasterize(minus, g, 1), 0.5), DomainSpec::ball({}, 1.0));
    EXPECT_EQ(b.components, 2);
    EXPECT_EQ(b.touching_components, 1);
}

TEST(Flux, ChargedBallAtRadiusTwo) {
    const GridSpec g = centered_grid(72, 1.0 / 16.0);
    const ScalarField w = rasterize(DomainSpec::ball({}, 1.0), g);
    const ScalarField phi = potential_fft(w);
    const double m = w.integral();
    const FluxCheck f = verify_flux(phi, {}, 2.0, m * 2.0, m);
    EXPECT_LE(f.error, 0.02);
    EXPECT_NEAR(expected_sphere_integral(w, {}, 2.0), 2.0 * m, 1e-12);
    EXPECT_THROW(verify_flux(phi, {}, 2.3, 0.0, m), DomainError);
}

TEST(Flux, ShellTheoremReferenceInsideTheSupport) {
    const GridSpec g = centered_grid(48, 1.0 / 16.0);
    const ScalarField w = rasterize(DomainSpec::annulus({0.1, 0, 0}, 0.4, 1.1), g);
    const ScalarField phi = potential_fft(w);
    const double m = w.integral();
    for (double R : {0.3, 0.8, 1.3}) {
        const FluxCheck f = verify_flux(phi, {}, R, expected_sphere_integral(w, {}, R), m);
        EXPECT_LE(f.error, 0.02) << "R = " << R;
    }
}

TEST(MinDiam, DirectionsAreUnitAndIncludeTheAxes) {
    const auto& d = min_diam_directions();
    ASSERT_EQ(d.size(), 16u);
    for (const Vec3& v : d) EXPECT_NEAR(norm(v), 1.0, 1e-14);
    EXPECT_EQ(d[0], (Vec3{1, 0, 0}));
}

TEST(MinDiam, RegularSingularAndInterior) {
    const double h = 1.0 / 32.0;
    const GridSpec g = centered_grid(64, h);
    const std::vector<double> radii = {4 * h, 6 * h, 8 * h, 12 * h};
    // Deep inside the zero set.
    const ScalarField zero(g, 0.0);
    for (const auto& s : min_diam_indicator(zero, {}, radii, 0.0)) EXPECT_GE(s.ratio, 0.9);
    // Planar free boundary x = 0: a half ball.
    const ScalarField plane = field_of(g, [](Vec3 x) { return x.x > 0 ? 0.5 * x.x * x.x : 0.0; });
    for (const auto& s : min_diam_indicator(plane, {}, radii, 0.0)) EXPECT_GE(s.ratio, 0.5);
    EXPECT_FALSE(singular_like(min_diam_indicator(plane, {}, radii, 0.0)));
    // Cusp: the zero set |x| <= (y^2 + z^2) / 2 pinches at the origin.
    const ScalarField cusp = field_of(g, [](Vec3 x) {
        const double d = std::abs(x.x) - 0.5 * (x.y * x.y + x.z * x.z);
        return d > 0 ? 0.5 * d * d : 0.0;
    });
    const auto samples = min_diam_indicator(cusp, {}, radii, 0.0);
    EXPECT_TRUE(singular_like(samples));
    EXPECT_LT(samples.back().ratio, 0.5);
    EXPECT_THROW(min_diam_indicator(zero, {}, {2.0}, 0.0), DomainError);
}

TEST(Interfaces, AnnulusRaster) {
    const double h = 1.0 / 16.0;
    const GridSpec g = centered_grid(48, h);
    const ScalarField u = rasterize(DomainSpec::annulus({}, 1.0, cbrt2()), g);
    const InterfaceRadii r = interface_radii(u, {}, 0.5, 1.4);
    ASSERT_TRUE(r.consistent);
    ASSERT_EQ(r.radii.size(), 2u);
    EXPECT_NEAR(r.radii[0], 1.0, 0.25 * h);
    EXPECT_NEAR(r.radii[1], cbrt2(), 0.25 * h);
}

TEST(Masks, DilateAndSymmetricDifference) {
    const GridSpec g = centered_grid(9, 1.0);
    ScalarField dot(g, 0.0);
    dot.at(4, 4, 4) = 1.0;
    const ScalarField d1 = dilate(dot, 1.0);
    EXPECT_NEAR(d1.integral(), 7.0, 1e-15);
    EXPECT_NEAR(dilate(dot, std::sqrt(2.0)).integral(), 19.0, 1e-15);
    EXPECT_NEAR(symmetric_difference(dot, d1), 6.0, 1e-15);
}

TEST(Masks, DensityPhaseUsesTheLocalCap) {
    const GridSpec g = centered_grid(4, 1.0);
    ScalarField u(g, 0.3), plus(g, 0.0);
    plus[0] = 0.6;  // mostly positive: never negative phase
    plus[1] = 0.2;  // cap 0.8, u below half of it
    plus[2] = 0.45; // cap 0.55, u = 0.3 above half
    const ScalarField p = density_phase(u, plus);
    EXPECT_EQ(p[0], 0.0);
    EXPECT_EQ(p[1], 0.0);
    EXPECT_EQ(p[2], 1.0);
    EXPECT_EQ(p[3], 0.0);
}
