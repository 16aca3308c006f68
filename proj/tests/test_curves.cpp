#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccx/curves.hpp"
#include "ccx/error.hpp"
#include "test_support.hpp"

using namespace ccx;

namespace {
const double kMonths[] = {1.0 / 12, 0.25, 0.5, 1, 2, 3, 5};
const double kEurUsd[] = {8.852, 8.695, 8.580, 8.605, 8.717, 8.952, 9.635};
const double kEurGbp[] = {6.570, 6.635, 7.350, 7.447, 7.865, 8.068, 8.383};
const double kEurJpy[] = {10.247, 10.245, 10.517, 10.848, 11.580, 12.247, 13.642};

std::vector<std::pair<double, double>> quotes(const double* pct) {
  std::vector<std::pair<double, double>> q;
  for (int i = 0; i < 7; ++i) q.emplace_back(kMonths[i], pct[i] / 100);
  return q;
}
}  // namespace

TEST(YieldCurve, FlatDiscountCurveGivesFlatYieldAndForward) {
  auto c = fixtures::flat_curve(0.02);
  for (double t : {0.0, 0.1, 0.7, 1.0, 2.5, 4.9, 9.99}) {
    EXPECT_NEAR(c.yield(t), 0.02, 1e-14);
    EXPECT_NEAR(c.forward(t), 0.02, 1e-14);
    EXPECT_NEAR(c.forward_derivative(t), 0.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(c.discount(0.0), 1.0);
}

TEST(YieldCurve, SingleKnotReproducesDefinition) {
  auto c = build_yield_curve({{1.0, 0.99}});
  EXPECT_EQ(c.yield(1.0), -std::log(0.99));
  EXPECT_NEAR(c.discount(1.0), 0.99, 1e-15);
}

TEST(YieldCurve, KnotsReproducedExactly) {
  auto c = fixtures::bundled_market().domestic.curve;
  for (size_t i = 0; i < c.tenors().size(); ++i) {
    double t = c.tenors()[i];
    EXPECT_EQ(c.yield(t), -std::log(c.discount_factors()[i]) / t);
  }
}

TEST(YieldCurve, DerivativesMatchFiniteDifferences) {
  auto c = fixtures::bundled_market().pairs[0].foreign.curve;
  for (double t : {0.3, 1.7, 2.2, 4.4, 6.1}) {
    const double h = 1e-5;
    EXPECT_NEAR(c.yield_derivative(t), (c.yield(t + h) - c.yield(t - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(c.forward_derivative(t), (c.forward(t + h) - c.forward(t - h)) / (2 * h), 1e-6);
    double lt = -std::log(c.discount(t + h)) + std::log(c.discount(t - h));
    EXPECT_NEAR(c.forward(t), lt / (2 * h), 1e-8);
  }
}

TEST(YieldCurve, RejectsBadInput) {
  EXPECT_THROW(build_yield_curve({{1.0, 0.99}, {1.0, 0.98}}), InvalidArgument);
  EXPECT_THROW(build_yield_curve({{2.0, 0.99}, {1.0, 0.98}}), InvalidArgument);
  EXPECT_THROW(build_yield_curve({{1.0, 0.0}}), InvalidArgument);
  auto c = fixtures::flat_curve(0.01, 5.0);
  EXPECT_THROW(c.yield(5.5), InvalidArgument);
  EXPECT_THROW(c.yield(-0.1), InvalidArgument);
}

TEST(Theta, FlatCurveZeroVolIsFlatRate) {
  auto th = theta_from_curve(fixtures::flat_curve(0.03), {0.05, 0.0, 0.03});
  for (double t : {0.0, 0.5, 3.0, 8.0}) EXPECT_NEAR(th(t), 0.03, 1e-14);
}

TEST(Theta, FlatCurveWithVolAddsConvexityTerm) {
  const double l = 0.05, e = 0.01, c = 0.03;
  auto th = theta_from_curve(fixtures::flat_curve(c), {l, e, c});
  for (double t : {0.0, 0.5, 3.0, 8.0})
    EXPECT_NEAR(th(t), c + e * e / (2 * l * l) * (1 - std::exp(-2 * l * t)), 1e-14);
}

TEST(Theta, ThrowsBeyondHorizon) {
  auto th = theta_from_curve(fixtures::flat_curve(0.03, 5.0), {0.05, 0.01, 0.03});
  EXPECT_THROW(th(6.0), InvalidArgument);
}

// Euler simulation of dr = lambda (Theta - r) dt + eta dW must reprice the curve.
TEST(Theta, ModelBondPricesRepriceTheCurve) {
  const auto& m = fixtures::bundled_market();
  const auto& curve = m.domestic.curve;
  HullWhiteParams hw = m.domestic.hw;
  auto th = theta_from_curve(curve, hw);
  const int paths = 100000, steps_per_year = 200;
  const double dt = 1.0 / steps_per_year;
  std::vector<double> grid_theta(5 * steps_per_year + 1);
  for (size_t k = 0; k < grid_theta.size(); ++k) grid_theta[k] = th(k * dt);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
  for (int p = 0; p < paths; ++p) {
    double r = curve.forward(0.0), integral = 0.0;
    int out = 0;
    for (int k = 0; k < 5 * steps_per_year; ++k) {
      double rn = r + hw.lambda * (grid_theta[k] - r) * dt + hw.eta * std::sqrt(dt) * nd(rng);
      integral += 0.5 * (r + rn) * dt;
      r = rn;
      int step = k + 1;
      if (step == steps_per_year || step == 3 * steps_per_year || step == 5 * steps_per_year) {
        double df = std::exp(-integral);
        sum[out] += df;
        sum2[out] += df * df;
        ++out;
      }
    }
  }
  const double T[3] = {1, 3, 5};
  for (int i = 0; i < 3; ++i) {
    double mean = sum[i] / paths;
    double se = std::sqrt((sum2[i] / paths - mean * mean) / paths);
    EXPECT_NEAR(mean, curve.discount(T[i]), 3 * se + 1e-7) << "T=" << T[i];
  }
}

TEST(PiecewiseVol, FlatQuotesGiveFlatLevels) {
  auto v = bootstrap_piecewise_vol({{0.5, 0.1}, {1, 0.1}, {2, 0.1}});
  for (double s : v.levels()) EXPECT_NEAR(s, 0.1, 1e-15);
}

TEST(PiecewiseVol, TwoKnotInductiveFormula) {
  auto v = bootstrap_piecewise_vol({{1, 0.10}, {2, 0.12}});
  EXPECT_NEAR(v.levels()[0], 0.10, 1e-15);
  EXPECT_NEAR(v.levels()[1], std::sqrt((0.12 * 0.12 * 2 - 0.10 * 0.10 * 1) / 1), 1e-15);
}

TEST(PiecewiseVol, TableQuotesRoundTrip) {
  for (const double* pct : {kEurUsd, kEurGbp, kEurJpy}) {
    auto q = quotes(pct);
    auto v = bootstrap_piecewise_vol(q);
    double cum = 0.0, prev = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
      cum += v.levels()[i] * v.levels()[i] * (q[i].first - prev);
      prev = q[i].first;
      EXPECT_NEAR(cum, q[i].second * q[i].second * q[i].first, 1e-12);
      EXPECT_NEAR(v.implied_vol(q[i].first), q[i].second, 1e-12);
    }
  }
}

TEST(PiecewiseVol, LeftContinuousAndFlatExtrapolation) {
  auto v = bootstrap_piecewise_vol(quotes(kEurUsd));
  EXPECT_EQ(v(1.0), v.levels()[3]);
  EXPECT_EQ(v(1.0 + 1e-9), v.levels()[4]);
  EXPECT_EQ(v(0.0), v.levels()[0]);
  EXPECT_EQ(v(7.0), v.levels().back());
}

TEST(PiecewiseVol, DecreasingVarianceNamesKnot) {
  try {
    bootstrap_piecewise_vol({{1, 0.2}, {2, 0.1}});
    FAIL() << "expected rejection";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("knot 2"), std::string::npos);
  }
}

TEST(Correlation, IdentityUnchanged) {
  auto c = regularize_correlation(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_LT((c.matrix() - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-15);
}

TEST(Correlation, AppendixMatrixIsNearlyUnchanged) {
  Eigen::MatrixXd raw = load_correlation(default_data_dir() + "/correlation.csv");
  auto c = regularize_correlation(raw);
  // The printed matrix is rounded to four decimals and has a tiny negative eigenvalue.
  EXPECT_LT((c.matrix() - raw).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_GE(c.min_eigenvalue(), -1e-12);
}

TEST(Correlation, InvalidTwoByTwoIsRepaired) {
  Eigen::MatrixXd raw(2, 2);
  raw << 1, -1.2, -1.2, 1;
  auto c = regularize_correlation(raw);
  // eigenpairs (2.2, (1,-1)/sqrt2) and (-0.2 -> 0): reassembled [[1.1,-1.1],[-1.1,1.1]] rescales to -1
  EXPECT_NEAR(c(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
  EXPECT_GE(c.min_eigenvalue(), -1e-12);
}

TEST(Correlation, IdempotentWithUnitDiagonal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Identity(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < i; ++j) raw(i, j) = raw(j, i) = u(rng);
    auto once = regularize_correlation(raw);
    auto twice = regularize_correlation(once.matrix());
    EXPECT_GE(once.min_eigenvalue(), -1e-12);
    EXPECT_LT((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff(), 1e-10);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(once(i, i), 1.0);
  }
}

TEST(Correlation, RejectsNonSymmetric) {
  Eigen::MatrixXd raw(2, 2);
  raw << 1, 0.3, 0.2, 1;
  EXPECT_THROW(regularize_correlation(raw), InvalidArgument);
}
