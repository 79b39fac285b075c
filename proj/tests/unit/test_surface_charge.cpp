#include <gtest/gtest.h>

#include <numbers>
#include <numeric>
#include <random>

#include "screen/error.hpp"
#include "screen/surface_charge.hpp"

using namespace screen;

namespace {
constexpr double kPi = std::numbers::pi;

double rel_std(const std::vector<double>& q) {
    const double mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    double var = 0.0;
    for (double v : q) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(q.size())) / mean;
}
}  // namespace

TEST(Simplex, KnownProjections) {
    std::vector<double> v = {0.5, 0.5, 0.5};
    project_simplex(v, 1.0);
    for (double x : v) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    v = {2.0, 0.0, 0.0};
    project_simplex(v, 1.0);
    EXPECT_NEAR(v[0], 1.0, 1e-15);
    EXPECT_EQ(v[1], 0.0);
    EXPECT_THROW(project_simplex(v, -1.0), PreconditionError);
    std::vector<double> empty;
    EXPECT_THROW(project_simplex(empty, 1.0), PreconditionError);
}

TEST(Simplex, OptimalityProperty) {
    std::mt19937 rng(2);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(50);
        for (double& x : v) x = d(rng);
        std::vector<double> p = v;
        project_simplex(p, 3.0);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 3.0, 1e-12);
        for (int k = 0; k < 10; ++k) {
            std::vector<double> q(50);
            for (double& x : q) x = std::abs(d(rng));
            project_simplex(q, 3.0);
            double ip = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) ip += (v[i] - p[i]) * (q[i] - p[i]);
            EXPECT_LE(ip, 1e-10);
        }
    }
}

TEST(Boundary, AreaWeights) {
    const SurfaceMeasure s = discretize_boundary(DomainSpec::ball({}, 2.0), 300);
    ASSERT_EQ(s.nodes.size(), 300u);
    EXPECT_NEAR(std::accumulate(s.weights.begin(), s.weights.end(), 0.0), 16.0 * kPi, 1e-11);
    for (const Vec3& x : s.nodes) EXPECT_NEAR(norm(x), 2.0, 1e-12);
    const SurfaceMeasure a = discretize_boundary(DomainSpec::annulus({}, 1.0, 2.0), 100);
    EXPECT_EQ(a.nodes.size(), 200u);
    EXPECT_THROW(discretize_boundary(DomainSpec::ball({}, 1.0), 0), PreconditionError);
}

TEST(SurfaceMeasure, SphereIsUniformAndScreens) {
    const double R = 1.0;
    const auto ball = DomainSpec::ball({}, R);
    const SurfaceSolution s = solve_surface_measure(ball, 1000, SolveConfig{});
    ASSERT_TRUE(s.converged);
    const double m = ball.volume();
    EXPECT_NEAR(std::accumulate(s.measure.masses.begin(), s.measure.masses.end(), 0.0), m, 1e-10 * m);
    EXPECT_LE(rel_std(s.measure.masses), 0.02);
    EXPECT_NEAR(s.energy, ball_surface_energy(R), 0.01 * std::abs(ball_surface_energy(R)));
    EXPECT_LE(exterior_mismatch(s.measure, ball, {}, 2.0 * R), 0.01);
}

TEST(SurfaceMeasure, RejectsTooFewNodesAndVoxels) {
    EXPECT_THROW(solve_surface_measure(DomainSpec::ball({}, 1.0), 5, SolveConfig{}), PreconditionError);
    EXPECT_THROW(ball_surface_energy(0.0), PreconditionError);
}

TEST(SurfaceMeasure, SelfInteractionVariantsAgreeOnEnergyScale) {
    const auto ball = DomainSpec::ball({}, 1.0);
    const double target = ball_surface_energy(1.0);
    const SurfaceSolution disk = solve_surface_measure(ball, 500, SolveConfig{}, SelfInteraction::disk_patch);
    EXPECT_NEAR(disk.energy, target, 0.05 * std::abs(target));
}

TEST(GammaSequence, NonIncreasingTowardTheLimit) {
    const auto ball = DomainSpec::ball({}, 1.0);
    const auto seq = gamma_energy_sequence(ball, {1.0, 0.5, 0.25}, 200);
    ASSERT_EQ(seq.size(), 3u);
    for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LE(seq[i].energy, seq[i - 1].energy);
    for (const auto& p : seq) EXPECT_GT(p.energy, ball_surface_energy(1.0));
    EXPECT_THROW(gamma_energy_sequence(ball, {0.5, 1.0}, 200), PreconditionError);
    EXPECT_THROW(gamma_energy_sequence(DomainSpec::annulus({}, 1.0, 2.0), {1.0}, 200), UnsupportedError);
}
