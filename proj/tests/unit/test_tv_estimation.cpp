#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "steinlab/tv_estimation.hpp"

using namespace steinlab;

namespace {

EmpiricalSample normal_sample(std::uint64_t n, std::uint64_t seed) {
  SeededStream s(seed, 77);
  std::vector<double> v(n);
  for (auto& x : v) x = s.normal();
  return make_sample(std::move(v));
}

EigenfunctionSpec linear(int n) {
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  a[0] = 1.0;
  return make_gegenbauer(n, 1, a);
}

}  // namespace

TEST(NormalHelpers, QuantileInvertsCdf) {
  for (double p : {1e-6, 0.02, 0.5, 0.9, 1 - 1e-6}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12);
  const auto edges = normal_cell_edges(50);
  ASSERT_EQ(edges.size(), 49u);
  EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
  EXPECT_NEAR(edges[24], 0.0, 1e-15);
}

TEST(MakeSample, SortsAndValidates) {
  const EmpiricalSample s = make_sample({3.0, -1.0, 2.0});
  EXPECT_TRUE(std::is_sorted(s.values.begin(), s.values.end()));
  EXPECT_THROW(make_sample({}), std::invalid_argument);
  EXPECT_THROW(make_sample({1.0, NAN}), std::invalid_argument);
}

TEST(TvHat, DegenerateSample) {
  for (int k : {2, 10, 50}) {
    const EmpiricalSample s = make_sample(std::vector<double>(1000, 0.3));
    EXPECT_NEAR(tv_hat(s, k), (k - 1.0) / k, 1e-15);
  }
  EXPECT_THROW(tv_hat(make_sample({0.0}), 1), std::invalid_argument);
}

TEST(TvHat, MultiplicityAndPermutationInvariant) {
  const EmpiricalSample s = normal_sample(5000, 1);
  std::vector<double> twice = s.values;
  twice.insert(twice.end(), s.values.begin(), s.values.end());
  std::reverse(twice.begin(), twice.end());
  EXPECT_DOUBLE_EQ(tv_hat(make_sample(twice), 20), tv_hat(s, 20));
}

TEST(TvHat, NullConcentration) {
  // Max over 100 null replications at N = 1e6, K = 50.
  SeededStream s(5, 5);
  double worst = 0;
  for (int r = 0; r < 100; ++r) worst = std::max(worst, null_tv_hat(1000000, 50, s));
  EXPECT_LE(worst, 0.02);
  const EmpiricalSample direct = normal_sample(1000000, 2);
  EXPECT_LE(tv_hat(direct, 50), 0.02);
}

TEST(KsStat, Examples) {
  EXPECT_DOUBLE_EQ(ks_stat(make_sample({0.0})), 0.5);
  const EmpiricalSample s = normal_sample(1000000, 3);
  EXPECT_LE(ks_stat(s), 0.002);
  EXPECT_LE(ks_stat(s), tv_hat(s, 50) + tv_slack(50, 1000000));
}

TEST(SampleValues, LinearHarmonicMoments) {
  const EmpiricalSample s = sample_values(linear(100), 1000000, SeededStream(4, 4));
  double m = 0, m2 = 0, m4 = 0;
  for (double v : s.values) {
    m += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double n = static_cast<double>(s.size());
  m /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_LE(std::abs(m), 4 * std::sqrt(m2 / n));
  EXPECT_LE(std::abs(m2 - 1.0), 4 * std::sqrt((m4 - m2 * m2) / n));
}

TEST(SampleValues, QuadraticUnitVariance) {
  RationalVector d(20);
  for (int i = 0; i < 20; ++i) d[static_cast<std::size_t>(i)] = i < 10 ? 1 : -1;
  const EmpiricalSample s = sample_values(make_quadratic(d), 500000, SeededStream(5, 5));
  double m2 = 0, m4 = 0;
  for (double v : s.values) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double n = static_cast<double>(s.size());
  m2 /= n;
  m4 /= n;
  EXPECT_LE(std::abs(m2 - 1.0), 4 * std::sqrt((m4 - m2 * m2) / n));
}

TEST(SampleValues, SingleDrawAndShardIndependence) {
  const EmpiricalSample one = sample_values(linear(10), 1, SeededStream(6, 6));
  EXPECT_EQ(one.size(), 1u);
  const EmpiricalSample a = sample_values(linear(10), 100000, SeededStream(6, 6), 1);
  const EmpiricalSample b = sample_values(linear(10), 100000, SeededStream(6, 6), 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
}

TEST(TvHat, DecreasesWithDimension) {
  double prev = 1.0;
  for (int n : {8, 32, 128, 512}) {
    const double t = tv_hat(sample_values(linear(n), 1000000, SeededStream(7, 7)), 50);
    EXPECT_LE(t, prev + tv_slack(50, 1000000) / 4);
    prev = t;
  }
}

TEST(BinCounts, CsvHasOneRowPerCell) {
  const EmpiricalSample s = normal_sample(1000, 8);
  const auto counts = bin_counts(s, 10);
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  EXPECT_EQ(total, 1000u);
  const std::string csv = bin_counts_csv(s, 10);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}
