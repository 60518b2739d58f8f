#include <gtest/gtest.h>

#include <chrono>

#include "steinlab/exact_arith.hpp"
#include "steinlab/identity_verifier.hpp"

using namespace steinlab;

TEST(AppendixSum, EqualsOneForOddEll) {
  for (int ell = 1; ell <= 25; ell += 2) {
    const IdentityResult r = appendix_sum(ell);
    EXPECT_TRUE(r.pass) << "ell=" << ell << " computed " << r.computed;
    EXPECT_EQ(r.computed, Rational(1));
  }
  EXPECT_THROW(appendix_sum(4), std::invalid_argument);
}

TEST(ClaimCheck, EqualsInverseFactorial) {
  EXPECT_EQ(claim_check(1).computed, Rational(1));
  EXPECT_EQ(claim_check(3).computed, Rational::parse("1/2"));
  for (int ell = 1; ell <= 25; ell += 2) {
    const IdentityResult c = claim_check(ell);
    EXPECT_TRUE(c.pass);
    EXPECT_EQ(c.computed * Rational(factorial(ell - 1)), appendix_sum(ell).computed);
  }
  EXPECT_THROW(claim_check(2), std::invalid_argument);
}

TEST(HypergeomInnerSum, Examples) {
  EXPECT_EQ(hypergeom_inner_sum(0, 0).computed, Rational(1));
  EXPECT_EQ(hypergeom_inner_sum(1, 0).computed, Rational(4));
  EXPECT_EQ(hypergeom_inner_sum(1, 1).computed, Rational(0));
  EXPECT_THROW(hypergeom_inner_sum(2, 3), std::invalid_argument);
}

TEST(HypergeomInnerSum, CaseSplitAndClosedFormAgree) {
  for (int p = 0; p <= 12; ++p)
    for (int k = 0; k <= p; ++k) {
      const IdentityResult r = hypergeom_inner_sum(p, k);
      EXPECT_TRUE(r.pass) << "p=" << p << " k=" << k;
      EXPECT_EQ(hypergeom_closed_form(p, k), r.computed) << "p=" << p << " k=" << k;
    }
}

TEST(ChuVandermonde, Examples) {
  EXPECT_EQ(chu_vandermonde(0, Rational(3), Rational(2)).computed, Rational(1));
  const IdentityResult r = chu_vandermonde(2, Rational(1), Rational(3));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.expected, Rational::parse("5/3"));
  EXPECT_TRUE(chu_vandermonde(3, Rational::parse("1/2"), Rational::parse("5/2")).pass);
  EXPECT_TRUE(chu_vandermonde(3, Rational::parse("1/2"), Rational::parse("-7/2")).pass);
}

TEST(ChuVandermonde, ForbiddenLowerParameter) {
  EXPECT_THROW(chu_vandermonde(3, Rational(1), Rational(-1)), std::invalid_argument);
  EXPECT_THROW(chu_vandermonde(3, Rational(1), Rational(0)), std::invalid_argument);
  EXPECT_NO_THROW(chu_vandermonde(1, Rational(1), Rational(-1)));
}

TEST(AllIdentities, PassWithinOneSecond) {
  const auto start = std::chrono::steady_clock::now();
  const auto all = all_identities(25, 12);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& r : all) EXPECT_TRUE(r.pass) << r.id << " " << r.parameters.dump();
  EXPECT_GT(all.size(), 200u);
  EXPECT_LT(secs, 1.0);
}
