#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rlxa/attractor.hpp"

using namespace rlxa;

namespace {

Cloud random_cloud(const Discretization& d, std::mt19937_64& rng, int points, double scale) {
  Cloud c;
  for (int k = 0; k < points; ++k) {
    const HypState s = random_hyp_state(d, rng, scale, 1.0);
    c.points.push_back(extend_hyperbolic(d, s.u, s.v));
    c.times.push_back(k);
    c.seed_index.push_back(0);
  }
  return c;
}

std::vector<Vec> pts(std::initializer_list<std::pair<double, double>> xs) {
  std::vector<Vec> out;
  for (auto [a, b] : xs) out.push_back(Eigen::Vector2d(a, b));
  return out;
}

}  // namespace

TEST(Semidistance, SmallExamples) {
  const auto a = pts({{3.0, 4.0}});
  const auto b = pts({{0.0, 0.0}});
  EXPECT_DOUBLE_EQ(semidistance_features(a, b), 5.0);
  EXPECT_EQ(semidistance_features(a, a), 0.0);
  const auto c = pts({{0.0, 0.0}, {3.0, 4.0}});
  EXPECT_EQ(semidistance_features(a, c), 0.0);
  EXPECT_DOUBLE_EQ(semidistance_features(c, a), 5.0);
  EXPECT_THROW(semidistance_features({}, b), std::invalid_argument);
  EXPECT_THROW(semidistance_features(a, {}), std::invalid_argument);
}

TEST(Semidistance, PrunedEqualsBruteForce) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> a(30 + trial), b(25);
    for (auto& x : a) x = Vec::NullaryExpr(6, [&]() { return g(rng); });
    for (auto& x : b) x = Vec::NullaryExpr(6, [&]() { return 2.0 * g(rng); });
    EXPECT_DOUBLE_EQ(semidistance_features(a, b), semidistance_features_bruteforce(a, b));
    EXPECT_DOUBLE_EQ(semidistance_features(a, b, 3), semidistance_features_bruteforce(a, b));
  }
}

TEST(Semidistance, CloudsAndTriangleBound) {
  const auto disc = make_discretization(Rectangle{0.0, 1.0, 0.0, 1.0}, 4);
  std::mt19937_64 rng(7);
  const Cloud a = random_cloud(*disc, rng, 15, 1.0);
  const Cloud b = random_cloud(*disc, rng, 12, 2.0);
  const Cloud c = random_cloud(*disc, rng, 10, 0.5);
  EXPECT_EQ(semidistance(*disc, a, a), 0.0);
  const double ab = semidistance(*disc, a, b);
  EXPECT_NEAR(ab, semidistance_bruteforce(*disc, a, b), 1e-12 * (1.0 + ab));
  EXPECT_LE(semidistance(*disc, a, c), ab + semidistance(*disc, b, c) + 1e-12);
  EXPECT_DOUBLE_EQ(hausdorff(*disc, a, b), std::max(ab, semidistance(*disc, b, a)));
}

TEST(Extended, NormAndFeatures) {
  const auto disc = make_discretization(Interval{0.0, 2.0}, 12);
  std::mt19937_64 rng(3);
  const HypState s = random_hyp_state(*disc, rng, 2.0, 0.4);
  const ExtState x = extend_hyperbolic(*disc, s.u, s.v);
  const auto& nm = disc->norms;
  EXPECT_NEAR(ext_norm_sq(*disc, x, 0.4), nm.hyp_sq(s.u, s.v, 0.4) + nm.boundary_sq(s.u) + 0.4 * nm.boundary_sq(s.v),
              1e-12);
  const HypState t = random_hyp_state(*disc, rng, 1.0, 0.4);
  const ExtState y = extend_hyperbolic(*disc, t.u, t.v);
  const CloudMetric metric(*disc);
  const double d2 = (metric.features(x) - metric.features(y)).squaredNorm();
  EXPECT_NEAR(d2, ext_norm_sq(*disc, ext_difference(x, y), 1.0), 1e-10 * (1.0 + d2));
}

TEST(Lift, ZeroMapsToZero) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 8);
  const ExtState x = lift(*disc, Nonlinearity::double_well(1.0), Vec::Zero(disc->size()));
  EXPECT_EQ(ext_norm_sq(*disc, x, 1.0), 0.0);
}

TEST(Lift, ConstantApproachesContinuumValue) {
  // The continuum lift of u ≡ 1 with f ≡ 0 is (1, 1, 0, −1); the discrete
  // one converges under refinement.
  const auto f = Nonlinearity::polynomial({});
  double prev_v = std::numeric_limits<double>::infinity();
  for (int n : {16, 64, 256}) {
    const auto disc = make_discretization(Interval{0.0, 1.0}, n);
    const int m = disc->size();
    const ExtState x = lift(*disc, f, Vec::Ones(m));
    EXPECT_EQ(x.gamma[0], 1.0);
    EXPECT_EQ(x.gamma[m - 1], 1.0);
    EXPECT_EQ(x.gamma[m / 2], 0.0);
    const double v = std::sqrt(disc->norms.l2_sq(x.v));
    EXPECT_LT(v, prev_v);
    prev_v = v;
    EXPECT_NEAR(x.delta[0], -1.0, 2.0 / n);
    EXPECT_NEAR(x.delta[m - 1], -1.0, 2.0 / n);
  }
  EXPECT_LT(prev_v, 0.1);
}

TEST(Cloud, ZeroSeedsGiveZeroCloud) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 8);
  SeedOptions s;
  s.n_seeds = 3;
  s.levels = {0.0};
  const CloudOptions o{0.5, 0.5, 0.05, 2};
  const Cloud a = omega_cloud(disc, Nonlinearity::double_well(1.0), 1.0, s, o);
  const Cloud b = omega_cloud(disc, Nonlinearity::double_well(1.0), 0.0, s, o);
  ASSERT_GT(a.size(), 0u);
  EXPECT_EQ(semidistance(*disc, a, b), 0.0);
  EXPECT_EQ(semidistance(*disc, b, a), 0.0);
}

TEST(Cloud, LinearDynamicsCollapse) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 16);
  const auto f = Nonlinearity::polynomial({0.0, 1.0});
  SeedOptions s;
  s.n_seeds = 4;
  const Cloud early = omega_cloud(disc, f, 1.0, s, {0.0, 0.5, 0.01, 10});
  const Cloud late = omega_cloud(disc, f, 1.0, s, {20.0, 1.0, 0.01, 10});
  Cloud origin;
  origin.points.push_back(extend_hyperbolic(*disc, Vec::Zero(disc->size()), Vec::Zero(disc->size())));
  const double d_early = semidistance(*disc, early, origin);
  const double d_late = semidistance(*disc, late, origin);
  EXPECT_LT(d_late, 1e-3 * d_early);
}

TEST(Cloud, SeedsAreDeterministic) {
  const auto disc = make_discretization(Rectangle{0.0, 1.0, 0.0, 1.0}, 4);
  const auto f = Nonlinearity::double_well(1.0);
  SeedOptions s;
  s.seed = 11;
  for (int k = 0; k < 6; ++k) {
    const HypState a = seed_state(*disc, f, 0.5, s, k);
    const HypState b = seed_state(*disc, f, 0.5, s, k);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
    EXPECT_NEAR(std::sqrt(disc->norms.hyp_sq(a.u, a.v, 0.5)), s.levels[k % 3], 1e-12 * s.levels[k % 3]);
  }
  s.velocity = Velocity::well_prepared;
  const HypState w = seed_state(*disc, f, 0.5, s, 0);
  EXPECT_LT((w.v - parabolic_velocity(*disc, f, w.u)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Absorbing, SmallRunIsAbsorbed) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 16);
  SeedOptions s;
  s.n_seeds = 4;
  const auto rep = absorbing_radius(disc, Nonlinearity::double_well(1.0), 1.0, s, {10.0, 0.02, 5}, 2);
  EXPECT_TRUE(rep.absorbed);
  EXPECT_TRUE(std::isfinite(rep.radius_sq));
  EXPECT_EQ(rep.curves.size(), 4u);
  EXPECT_EQ(rep.entry_times.size(), 4u);
}

TEST(Sweep, RowsFollowGrid) {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 12);
  SeedOptions s;
  s.n_seeds = 2;
  const auto rep = semicontinuity_sweep(disc, Nonlinearity::double_well(1.0), {0.1, 0.5}, s, {1.0, 1.0, 0.02, 5});
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_GT(rep.rows[0].eps, rep.rows[1].eps);
  for (const auto& r : rep.rows) {
    EXPECT_GE(r.distance, 0.0);
    EXPECT_GT(r.n_a, 0u);
    EXPECT_GT(r.n_b, 0u);
  }
}
