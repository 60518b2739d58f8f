#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "steinlab/json_io.hpp"
#include "steinlab/sampling.hpp"
#include "steinlab/sphere_moments.hpp"

using namespace steinlab;

namespace {

MultiIndex idx(int n, std::vector<MultiIndex::Factor> f) { return MultiIndex(n, std::move(f)); }

// All even exponent vectors of total degree <= max_degree in n variables.
void even_indices(int n, int var, int left, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (var == n) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= left; e += 2) {
    cur[static_cast<std::size_t>(var)] = e;
    even_indices(n, var + 1, left - e, cur, out);
  }
  cur[static_cast<std::size_t>(var)] = 0;
}

}  // namespace

TEST(MultiIndex, MergesAndValidates) {
  const MultiIndex a = idx(4, {{2, 1}, {0, 3}, {2, 2}, {1, 0}});
  ASSERT_EQ(a.factors().size(), 2u);
  EXPECT_EQ(a.exponent(0), 3);
  EXPECT_EQ(a.exponent(2), 3);
  EXPECT_EQ(a.total_degree(), 6);
  EXPECT_THROW(idx(3, {{3, 1}}), std::invalid_argument);
  EXPECT_THROW(idx(3, {{0, -1}}), std::invalid_argument);
}

TEST(MonomialMoment, Examples) {
  for (int n : {2, 3, 7, 40}) {
    EXPECT_EQ(monomial_moment(MultiIndex(n)), Rational(1));
    EXPECT_EQ(monomial_moment(idx(n, {{0, 2}})), Rational(1) / Rational(n));
    EXPECT_EQ(monomial_moment(idx(n, {{0, 4}})), Rational(3) / Rational(n * (n + 2)));
    EXPECT_EQ(monomial_moment(idx(n, {{0, 2}, {1, 2}})), Rational(1) / Rational(n * (n + 2)));
    EXPECT_EQ(monomial_moment(idx(n, {{0, 3}})), Rational(0));
  }
  EXPECT_THROW(monomial_moment(MultiIndex(1)), std::invalid_argument);
}

TEST(MonomialMoment, PermutationInvariant) {
  EXPECT_EQ(monomial_moment(idx(6, {{0, 4}, {3, 2}, {5, 6}})), monomial_moment(idx(6, {{1, 6}, {2, 4}, {4, 2}})));
}

TEST(MonomialMoment, GammaRatioMatchesDoubleFactorialForm) {
  for (int n = 2; n <= 12; ++n) {
    std::vector<std::vector<int>> all;
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    even_indices(n, 0, 8, cur, all);
    for (const auto& e : all) {
      const MultiIndex a = MultiIndex::from_dense(e);
      ASSERT_EQ(monomial_moment(a), monomial_moment_closed_form(a)) << "n=" << n;
    }
  }
}

TEST(MonomialMoment, MonteCarloOracle) {
  const int n = 5;
  std::vector<std::vector<int>> all;
  std::vector<int> cur(n, 0);
  even_indices(n, 0, 6, cur, all);
  const std::size_t m = all.size();
  std::vector<double> s1(m), s2(m);
  SeededStream s(2024, 1);
  std::vector<double> x(n);
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    sample_sphere_into(s, x);
    for (std::size_t k = 0; k < m; ++k) {
      double v = 1.0;
      for (int j = 0; j < n; ++j) v *= std::pow(x[static_cast<std::size_t>(j)], all[k][static_cast<std::size_t>(j)]);
      s1[k] += v;
      s2[k] += v * v;
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double mean = s1[k] / draws;
    const double se = std::sqrt((s2[k] / draws - mean * mean) / (draws - 1));
    const double exact = monomial_moment(MultiIndex::from_dense(all[k])).to_double();
    EXPECT_LE(std::abs(mean - exact), 4 * se + 1e-15) << "index " << k;
  }
}

TEST(PolynomialExpectation, Examples) {
  SpherePolynomial unit(7);
  for (int i = 0; i < 7; ++i) unit += SpherePolynomial::variable(7, i) * SpherePolynomial::variable(7, i);
  EXPECT_EQ(polynomial_expectation(unit), Rational(1));

  const SpherePolynomial x1 = SpherePolynomial::variable(4, 0), x2 = SpherePolynomial::variable(4, 1);
  const SpherePolynomial diff = x1 * x1 - x2 * x2;
  EXPECT_EQ(polynomial_expectation(diff), Rational(0));
  EXPECT_EQ(polynomial_expectation(diff * diff), Rational::parse("1/6"));
}

TEST(PolynomialExpectation, Linear) {
  const SpherePolynomial p = SpherePolynomial::monomial(idx(5, {{0, 2}, {3, 4}}), Rational(3)) +
                             SpherePolynomial::monomial(idx(5, {{1, 6}}), Rational(-1));
  const Rational c = Rational::parse("-22/7");
  EXPECT_EQ(polynomial_expectation(p * c), c * polynomial_expectation(p));
}

TEST(SpherePolynomial, ZeroCoefficientsDropped) {
  SpherePolynomial p = SpherePolynomial::variable(3, 0);
  p -= SpherePolynomial::variable(3, 0);
  EXPECT_TRUE(p.is_zero());
  EXPECT_THROW(SpherePolynomial::variable(3, 0) + SpherePolynomial::variable(4, 0), std::invalid_argument);
}

TEST(SpherePolynomial, CalculusAndEvaluation) {
  const SpherePolynomial x = SpherePolynomial::variable(3, 0), y = SpherePolynomial::variable(3, 1);
  const SpherePolynomial p = x * x * y - y * y * y * Rational(2);
  EXPECT_EQ(p.derivative(0), x * y * Rational(2));
  EXPECT_EQ(p.laplacian(), y * Rational(2) - y * Rational(12));
  const double pt[3] = {0.5, -1.5, 2.0};
  EXPECT_DOUBLE_EQ(p.evaluate(pt), 0.25 * -1.5 - 2 * -3.375);
}

TEST(SpherePolynomial, JsonRoundTrip) {
  const SpherePolynomial p = SpherePolynomial::monomial(idx(5, {{0, 2}, {3, 4}}), Rational::parse("3/7")) +
                             SpherePolynomial::constant(5, Rational(-2));
  const Json j = polynomial_to_json(p);
  EXPECT_EQ(j.at("dimension").get<int>(), 5);
  EXPECT_EQ(polynomial_from_json(j), p);
}

TEST(DiagonalFormMoment, MatchesPolynomialExpansion) {
  const int n = 4;
  const RationalVector d1 = {Rational(1), Rational(-2), Rational(0), Rational(1)};
  const RationalVector d2 = {Rational(1), Rational(1), Rational(1), Rational(1)};
  SpherePolynomial q1(n), q2(n);
  for (int i = 0; i < n; ++i) {
    const SpherePolynomial xi2 = SpherePolynomial::variable(n, i) * SpherePolynomial::variable(n, i);
    q1 += xi2 * d1[static_cast<std::size_t>(i)];
    q2 += xi2 * d2[static_cast<std::size_t>(i)];
  }
  const RationalVector forms[] = {d1, d1, d2, d1};
  EXPECT_EQ(diagonal_form_moment(n, forms), polynomial_expectation(q1 * q1 * q2 * q1));
}
