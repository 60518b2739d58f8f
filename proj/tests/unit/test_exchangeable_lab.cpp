#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "steinlab/exchangeable_lab.hpp"

using namespace steinlab;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kGrid = {0.1, 0.05, 0.025};

EigenfunctionSpec linear(int n) {
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  a[0] = 1.0;
  return make_gegenbauer(n, 1, a);
}

EigenfunctionSpec quadratic(int n) {
  RationalVector d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = Rational(i + 1) - Rational(n + 1) / Rational(2);
  return make_quadratic(d);
}

EigenfunctionSpec torus_single(int n) {
  RationalMatrix b(static_cast<std::size_t>(n), RationalVector(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  RationalVector e(static_cast<std::size_t>(n));
  e[0] = 1;
  return make_torus(b, {e}, {std::sqrt(2.0)});
}

}  // namespace

TEST(Drift, LinearHarmonicAtPole) {
  const int n = 10;
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  const ConditionReport r = drift_check(linear(n), x, {0.05}, 100000, SeededStream(1, 1));
  // Delta(sqrt(n) x_1) = -(n-1) sqrt(n) x_1 on S^{n-1}, divided by 2 dim = 2(n-1).
  EXPECT_NEAR(r.reference, -std::sqrt(n) / 2, 1e-12);
  // Antithetic pairs make the estimate deterministic here: sqrt(n)(cos eps - 1)/eps^2.
  EXPECT_NEAR(r.rows[0].estimate, std::sqrt(n) * (std::cos(0.05) - 1) / 0.0025, 1e-9);
  EXPECT_LE(std::abs(r.rows[0].residual), 4 * r.rows[0].standard_error + 0.05 * std::sqrt(n));
}

TEST(Conditions, QuadraticAtRandomPoint) {
  const int n = 10;
  const EigenfunctionSpec f = quadratic(n);
  SeededStream ps(2, 2);
  const auto x = sample_sphere(n, ps);
  const ConditionSuite s = condition_suite(f, x, kGrid, 200000, SeededStream(3, 3));
  EXPECT_TRUE(s.drift.pass);
  EXPECT_TRUE(s.diffusion.pass);
  EXPECT_TRUE(s.third_moment.pass);
  EXPECT_NEAR(s.diffusion.reference, gradient_norm_squared(f, x) / (n - 1), 1e-12);
  // Drift reference equals -(mu / 2 dim) f(x) for a single eigenfunction.
  EXPECT_NEAR(s.drift.reference, -2.0 * n * eval(f, x) / (2.0 * (n - 1)), 1e-10);
  for (const EpsRow& row : s.third_moment.rows) {
    EXPECT_GE(row.estimate, 0.0);
    EXPECT_LE(row.estimate, row.eps * std::pow(s.third_moment.lipschitz, 3));
  }
  for (std::size_t k = 1; k < kGrid.size(); ++k) {
    const double ratio = s.third_moment.rows[k].estimate / s.third_moment.rows[k - 1].estimate;
    EXPECT_GE(ratio, 0.3);
    EXPECT_LE(ratio, 0.7);
  }
  EXPECT_GE(s.third_moment.loglog_slope, 0.7);
}

TEST(Conditions, WrappersMatchSuite) {
  const EigenfunctionSpec f = quadratic(6);
  SeededStream ps(4, 4);
  const auto x = sample_sphere(6, ps);
  const ConditionSuite s = condition_suite(f, x, kGrid, 20000, SeededStream(5, 5));
  EXPECT_EQ(drift_check(f, x, kGrid, 20000, SeededStream(5, 5)).to_json().dump(), s.drift.to_json().dump());
  EXPECT_EQ(diffusion_check(f, x, kGrid, 20000, SeededStream(5, 5), 3).to_json().dump(),
            s.diffusion.to_json().dump());
}

TEST(Diffusion, TorusReference) {
  const int n = 3;
  const std::vector<double> x = {0.13, 0.5, 0.9};
  const ConditionReport r = diffusion_check(torus_single(n), x, kGrid, 100000, SeededStream(6, 6));
  const double s = std::sin(2 * kPi * x[0]);
  EXPECT_NEAR(r.reference, 8 * kPi * kPi * s * s / n, 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(Diffusion, CriticalPointGoesToZero) {
  const int n = 10;
  std::vector<double> x(n, 0.0);
  x[0] = 1.0;
  const ConditionReport r = diffusion_check(linear(n), x, kGrid, 50000, SeededStream(7, 7));
  EXPECT_EQ(r.reference, 0.0);
  EXPECT_LT(r.rows.back().estimate, r.rows.front().estimate);
  EXPECT_LT(r.rows.back().estimate, 0.01);
  EXPECT_TRUE(r.pass);
}

TEST(Conditions, RejectInvalidInput) {
  const EigenfunctionSpec f = quadratic(4);
  const std::vector<double> x = {1, 0, 0, 0};
  EXPECT_THROW(drift_check(f, x, {0.05, 0.1}, 20000, SeededStream(1, 1)), std::invalid_argument);
  EXPECT_THROW(drift_check(f, x, {3.5}, 20000, SeededStream(1, 1)), std::invalid_argument);
  EXPECT_THROW(drift_check(f, x, {0.1}, 9999, SeededStream(1, 1)), std::invalid_argument);
  EXPECT_THROW(drift_check(f, std::vector<double>{1, 1, 0, 0}, {0.1}, 20000, SeededStream(1, 1)),
               std::invalid_argument);
}

TEST(Conditions, Deterministic) {
  const EigenfunctionSpec f = quadratic(5);
  const std::vector<double> x = {0.6, 0.8, 0, 0, 0};
  const auto a = condition_suite(f, x, kGrid, 70000, SeededStream(8, 8), 1);
  const auto b = condition_suite(f, x, kGrid, 70000, SeededStream(8, 8), 4);
  EXPECT_EQ(a.third_moment.to_json().dump(), b.third_moment.to_json().dump());
  EXPECT_EQ(a.drift.csv_rows("p,"), b.drift.csv_rows("p,"));
}

TEST(Exchangeability, GeodesicPassesUphillFails) {
  for (const EigenfunctionSpec& f : {quadratic(10), torus_single(3)}) {
    const ExchangeabilityReport ok = exchangeability_check(f, 0.1, 200000, SeededStream(9, 9));
    EXPECT_TRUE(ok.pass) << ok.to_json().dump();
    EXPECT_EQ(ok.tests.size(), 5u);
    const ExchangeabilityReport bad = exchangeability_check(f, 0.1, 200000, SeededStream(9, 10), PairKind::Uphill);
    EXPECT_FALSE(bad.pass);
    EXPECT_EQ(bad.to_json().at("kind").get<std::string>(), "uphill");
  }
}

TEST(Lipschitz, CoversKnownSupremum) {
  // sup |grad|^2 = 8 pi^2 for sqrt2 cos(2 pi x_1).
  const double l = estimate_lipschitz(torus_single(2), 10000, SeededStream(10, 10));
  EXPECT_LE(l, std::sqrt(8.0) * kPi + 1e-12);
  EXPECT_GT(l, 0.99 * std::sqrt(8.0) * kPi);
}
