#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "screen/error.hpp"
#include "screen/geometry.hpp"
#include "test_support.hpp"

using namespace screen;
using screen::testing::centered_grid;

TEST(Grid, IndexUnravelRoundTrip) {
    const GridSpec g({0, 0, 0}, 0.5, {5, 6, 7});
    for (std::size_t n = 0; n < g.size(); n += 13) {
        const auto [i, j, k] = g.unravel(n);
        EXPECT_EQ(g.index(i, j, k), n);
    }
    EXPECT_EQ(g.cell_center(0, 0, 0), (Vec3{0.25, 0.25, 0.25}));
}

TEST(Grid, RejectsBadSpecs) {
    EXPECT_THROW(GridSpec({0, 0, 0}, 0.0, {4, 4, 4}), PreconditionError);
    EXPECT_THROW(GridSpec({0, 0, 0}, 1.0, {3, 4, 4}), PreconditionError);
    const GridSpec g({0, 0, 0}, 1.0, {4, 4, 4});
    EXPECT_THROW(ScalarField(g, std::vector<double>(10)), PreconditionError);
    std::vector<double> v(g.size(), 0.0);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ScalarField(g, v), PreconditionError);
}

TEST(Grid, TrilinearInterpolationIsExactForLinearFields) {
    const GridSpec g = centered_grid(8, 0.25);
    ScalarField f(g);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                const Vec3 c = g.cell_center(i, j, k);
                f.at(i, j, k) = 1.0 + 2.0 * c.x - 3.0 * c.y + 0.5 * c.z;
            }
    const Vec3 p{0.1, -0.3, 0.45};
    EXPECT_NEAR(f.interpolate(p), 1.0 + 0.2 + 0.9 + 0.225, 1e-13);
    EXPECT_THROW(f.interpolate({0.99, 0, 0}), DomainError);
}

TEST(Geometry, ExactVolumes) {
    EXPECT_NEAR(DomainSpec::ball({}, 1.0).volume(), 4.0 * std::numbers::pi / 3.0, 1e-14);
    EXPECT_NEAR(DomainSpec::annulus({}, 1.0, 2.0).volume(), 4.0 * std::numbers::pi / 3.0 * 7.0, 1e-12);
    const auto u = DomainSpec::union_of({DomainSpec::ball({-2, 0, 0}, 1), DomainSpec::ball({2, 0, 0}, 0.5)});
    EXPECT_NEAR(u.volume(), 4.0 * std::numbers::pi / 3.0 * (1.0 + 0.125), 1e-12);
}

TEST(Geometry, ValidatingConstructors) {
    EXPECT_THROW(DomainSpec::ball({}, 0.0), PreconditionError);
    EXPECT_THROW(DomainSpec::annulus({}, 2.0, 1.0), PreconditionError);
    EXPECT_THROW(DomainSpec::annulus({}, -1.0, 1.0), PreconditionError);
    const GridSpec g = centered_grid(4, 1.0);
    ScalarField half(g, 0.5);
    EXPECT_THROW(DomainSpec::voxels(half), PreconditionError);
    EXPECT_TRUE(DomainSpec::union_of({}).empty());
}

TEST(Geometry, SignedDistanceAndContainment) {
    const auto b = DomainSpec::ball({1, 0, 0}, 2.0);
    EXPECT_NEAR(b.signed_distance({4, 0, 0}), 1.0, 1e-14);
    EXPECT_NEAR(b.signed_distance({1, 0, 0}), -2.0, 1e-14);
    const auto a = DomainSpec::annulus({}, 1.0, 2.0);
    EXPECT_NEAR(a.signed_distance({0, 0, 0}), 1.0, 1e-14);
    EXPECT_NEAR(a.signed_distance({0, 1.5, 0}), -0.5, 1e-14);
    EXPECT_FALSE(a.contains({0.5, 0, 0}));
    EXPECT_TRUE(a.contains({0, 0, 1.5}));
    EXPECT_NEAR(a.diameter(), 4.0, 1e-14);
}

TEST(Geometry, RasterIntegralApproximatesVolume) {
    // Property over random balls: the stratified raster converges to the exact volume.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(-0.3, 0.3), rad(0.4, 0.9);
    const GridSpec g = centered_grid(40, 1.0 / 16.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto b = DomainSpec::ball({pos(rng), pos(rng), pos(rng)}, rad(rng));
        const ScalarField r = rasterize(b, g, 4);
        EXPECT_NEAR(r.integral(), b.volume(), 5e-3 * b.volume());
        EXPECT_GE(r.min(), 0.0);
        EXPECT_LE(r.max(), 1.0);
    }
}

TEST(Geometry, RasterRefusesDomainsOutsideTheGrid) {
    const GridSpec g = centered_grid(8, 0.25);
    EXPECT_THROW(rasterize(DomainSpec::ball({}, 1.2), g), DomainError);
}

TEST(Geometry, BoxesAndGrids) {
    const auto b = DomainSpec::ball({}, 1.0);
    const double reach = 2.0 * std::cbrt(b.volume());
    const Box s = suggested_box(b, 0.1);
    EXPECT_NEAR(s.hi.x, 1.0 + reach + 0.1, 1e-12);
    EXPECT_NEAR(s.lo.z, -(1.0 + reach + 0.1), 1e-12);
    const Box w = working_box(b, 0.3);
    EXPECT_TRUE(s.contains(w));

    const GridSpec g = grid_for_box(w, 1.0 / 32.0);
    for (int a = 0; a < 3; ++a) {
        EXPECT_LE(g.box_min()[a], w.lo[a] + 1e-12);
        EXPECT_GE(g.box_max()[a], w.hi[a] - 1e-12);
        int n = g.dim(a);
        for (int p : {2, 3, 5, 7})
            while (n % p == 0) n /= p;
        EXPECT_EQ(n, 1) << "dim " << g.dim(a) << " is not 7-smooth";
    }
}

TEST(Geometry, ConnectedComponents) {
    const GridSpec g = centered_grid(16, 0.25);
    const auto two = DomainSpec::union_of({DomainSpec::ball({-1, 0, 0}, 0.6), DomainSpec::ball({1, 0, 0}, 0.6)});
    const Labeling lab = connected_components(threshold_mask(rasterize(two, g), 0.5));
    EXPECT_EQ(lab.count, 2);
    EXPECT_EQ(connected_components(ScalarField(g, 0.0)).count, 0);
}

TEST(Geometry, FibonacciSphereIsBalanced) {
    const auto pts = fibonacci_sphere(500);
    ASSERT_EQ(pts.size(), 500u);
    Vec3 mean{};
    for (const Vec3& p : pts) {
        EXPECT_NEAR(norm(p), 1.0, 1e-12);
        mean = mean + (1.0 / 500.0) * p;
    }
    EXPECT_LT(norm(mean), 1e-2);
}
