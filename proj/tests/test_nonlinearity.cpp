#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rlxa/nonlinearity.hpp"

using rlxa::Nonlinearity;

TEST(Nonlinearity, DoubleWellValues) {
  const Nonlinearity f = Nonlinearity::double_well(1.0);
  EXPECT_DOUBLE_EQ(f.f(1.0), -1.0);
  EXPECT_DOUBLE_EQ(f.F(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f.F(2.0), 4.0 - 4.0);
  EXPECT_DOUBLE_EQ(f.with_beta(2.0).psi(1.0), 1.0);
  EXPECT_DOUBLE_EQ(f.with_beta(2.0).Psi(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f.monotonicity_defect(), 2.0);
  EXPECT_DOUBLE_EQ(Nonlinearity::double_well(2.5).monotonicity_defect(), 5.0);
}

TEST(Nonlinearity, PolynomialBasics) {
  const Nonlinearity f = Nonlinearity::polynomial({1.0, -2.0, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(f.F(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f.f(2.0), 1.0 - 4.0 + 2.0 + 8.0);
  EXPECT_THROW(Nonlinearity::polynomial({0, 0, 0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(Nonlinearity::double_well(0.0), std::invalid_argument);
  EXPECT_THROW((void)Nonlinearity::double_well(1.0).with_beta(1.0), std::invalid_argument);
  EXPECT_TRUE(Nonlinearity::polynomial({0.0, 3.0}).is_linear());
  EXPECT_FALSE(f.is_linear());
}

TEST(Nonlinearity, AntiderivativesByFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), pt(-4.0, 4.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Nonlinearity base = Nonlinearity::polynomial({coef(rng), coef(rng), coef(rng), std::abs(coef(rng)) + 0.1});
    const Nonlinearity f = base.with_beta(base.monotonicity_defect() + 0.5);
    for (int i = 0; i < 100; ++i) {
      const double s = pt(rng);
      const double dF = (f.F(s + h) - f.F(s - h)) / (2 * h);
      const double dPsi = (f.Psi(s + h) - f.Psi(s - h)) / (2 * h);
      const double df = (f.f(s + h) - f.f(s - h)) / (2 * h);
      EXPECT_LE(std::abs(dF - f.f(s)), 1e-6 * std::max(1.0, std::abs(f.f(s))));
      EXPECT_LE(std::abs(dPsi - f.psi(s)), 1e-6 * std::max(1.0, std::abs(f.psi(s))));
      EXPECT_LE(std::abs(df - f.fprime(s)), 1e-6 * std::max(1.0, std::abs(f.fprime(s))));
      EXPECT_GE(f.psiprime(s), 0.0);
    }
  }
}

TEST(Nonlinearity, AverageVectorFieldQuotient) {
  const Nonlinearity f = Nonlinearity::polynomial({0.3, -1.0, 0.7, 2.0});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pt(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = pt(rng), b = pt(rng);
    if (std::abs(b - a) < 1e-3) continue;
    EXPECT_NEAR(f.f_avg(a, b), (f.F(b) - f.F(a)) / (b - a), 1e-11);
    const double h = 1e-6;
    EXPECT_NEAR(f.f_avg_db(a, b), (f.f_avg(a, b + h) - f.f_avg(a, b - h)) / (2 * h), 1e-6);
  }
  EXPECT_DOUBLE_EQ(f.f_avg(0.4, 0.4), f.f(0.4));
}

TEST(Assumptions, ZeroNonlinearity) {
  const auto r = rlxa::check_assumptions(Nonlinearity::polynomial({}), 1.5, 10.0, 2001);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.theta, 0.0);
  EXPECT_EQ(r.c1, 0.0);
  EXPECT_EQ(r.c2, 0.0);
}

TEST(Assumptions, DoubleWellPassesForAnyWellDepth) {
  for (double k : {0.1, 1.0, 4.0}) {
    for (double lambda : {0.3, 1.7, 9.0}) {
      const auto r = rlxa::check_assumptions(Nonlinearity::double_well(k), lambda, 20.0, 4001);
      EXPECT_TRUE(r.growth_ok && r.sign_ok && r.monotone_ok && r.shift_ok) << "k=" << k << " lambda=" << lambda;
      EXPECT_DOUBLE_EQ(r.theta, 2.0 * k);
      EXPECT_GE(r.c1, 0.0);
      EXPECT_GE(r.c2, 0.0);
      EXPECT_LE(r.mu, r.lambda);
    }
  }
}

TEST(Assumptions, SignViolation) {
  const double lambda = 2.0;
  const auto r = rlxa::check_assumptions(Nonlinearity::polynomial({0.0, -2.0 * lambda}), lambda, 10.0, 1001);
  EXPECT_FALSE(r.sign_ok);
  EXPECT_FALSE(r.all_pass());
}
