#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "steinlab/eigenfunctions.hpp"
#include "steinlab/json_io.hpp"
#include "steinlab/sampling.hpp"

using namespace steinlab;

namespace {

constexpr double kPi = std::numbers::pi;

RationalVector random_traceless(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
  RationalVector d(static_cast<std::size_t>(n));
  Rational sum;
  do {
    sum = Rational(0);
    for (int i = 0; i + 1 < n; ++i) {
      d[static_cast<std::size_t>(i)] = Rational(num(rng)) / Rational(den(rng));
      sum += d[static_cast<std::size_t>(i)];
    }
    d.back() = -sum;
  } while (std::all_of(d.begin(), d.end(), [](const Rational& r) { return r.is_zero(); }));
  return d;
}

std::vector<double> unit(int n, int i) {
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  e[static_cast<std::size_t>(i)] = 1.0;
  return e;
}

RationalMatrix identity(int n) {
  RationalMatrix b(static_cast<std::size_t>(n), RationalVector(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  return b;
}

RationalVector basis(int n, int i) {
  RationalVector e(static_cast<std::size_t>(n));
  e[static_cast<std::size_t>(i)] = 1;
  return e;
}

}  // namespace

TEST(Quadratic, Normalizer) {
  EXPECT_EQ(make_quadratic({Rational(1), Rational(-1)}).c_squared, Rational(2));
  for (int n : {2, 4, 10, 100}) {
    RationalVector d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : -1;
    EXPECT_EQ(make_quadratic(d).c_squared, Rational(n + 2) / Rational(2));
  }
  EXPECT_THROW(make_quadratic({Rational(1), Rational(1)}), std::invalid_argument);
  EXPECT_THROW(make_quadratic({Rational(0), Rational(0)}), std::invalid_argument);
  EXPECT_THROW(make_quadratic({Rational(0)}), std::invalid_argument);
}

TEST(Quadratic, ExactStokesAndNormalization) {
  std::mt19937_64 rng(7);
  for (int n : {4, 10}) {
    for (int r = 0; r < 5; ++r) {
      const EigenfunctionSpec f = make_quadratic(random_traceless(n, rng));
      EXPECT_EQ(polynomial_expectation(squared_polynomial(f)), Rational(1));
      EXPECT_EQ(polynomial_expectation(gradient_norm_squared_polynomial(f)), Rational(2 * n));
      EXPECT_EQ(polynomial_expectation(laplacian_pairing_polynomial(f)), Rational(2 * n));
    }
  }
}

TEST(Quadratic, FromMatrixExtractsSpectrum) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 0, 2, -3, 1, 0, 1, 2;
  const QuadraticHarmonic q = make_quadratic_from_matrix(a);
  Rational s;
  for (const auto& v : q.d) s += v;
  EXPECT_TRUE(s.is_zero());
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q.d_double[static_cast<std::size_t>(i)], ev(i), 1e-12);
  Eigen::MatrixXd bad = a;
  bad(0, 1) = 5;
  EXPECT_THROW(make_quadratic_from_matrix(bad), std::invalid_argument);
  bad = a;
  bad(0, 0) = 3;
  EXPECT_THROW(make_quadratic_from_matrix(bad), std::invalid_argument);
}

TEST(Quadratic, EvalAtBasisVector) {
  const int n = 6;
  RationalVector d(n);
  d[0] = 1;
  d[1] = -1;
  const EigenfunctionSpec f = make_quadratic(d);
  const auto& q = std::get<QuadraticHarmonic>(f);
  EXPECT_NEAR(eval(f, unit(n, 0)), q.c, 1e-14);
  EXPECT_NEAR(eval(f, unit(n, 1)), -q.c, 1e-14);
  std::vector<double> off = unit(n, 0);
  off[0] = 1.1;
  EXPECT_THROW(eval(f, off), std::invalid_argument);
  EXPECT_THROW(eval(f, unit(n + 1, 0)), std::invalid_argument);
}

TEST(Gegenbauer, LowDegrees) {
  for (int two_k : {1, 3, 8}) {
    const Rational k = Rational(two_k) / Rational(2);
    for (const char* t : {"0", "1/3", "-5/7", "2"}) {
      const Rational x = Rational::parse(t);
      EXPECT_EQ(gegenbauer_eval(two_k, 0, x), Rational(1));
      EXPECT_EQ(gegenbauer_eval(two_k, 1, x), Rational(2) * k * x);
    }
  }
}

TEST(Gegenbauer, DerivativeIdentity) {
  // d/dt C^p_m = 2p C^{p+1}_{m-1}, compared coefficientwise.
  for (int two_p = 1; two_p <= 9; ++two_p)
    for (int m = 1; m <= 6; ++m) {
      const RationalVector c = gegenbauer_coefficients(two_p, m);
      const RationalVector up = gegenbauer_coefficients(two_p + 2, m - 1);
      for (int j = 1; j <= m; ++j) {
        const Rational lhs = c[static_cast<std::size_t>(j)] * Rational(j);
        const Rational rhs = Rational(two_p) * up[static_cast<std::size_t>(j - 1)];
        EXPECT_EQ(lhs, rhs) << "2p=" << two_p << " m=" << m << " j=" << j;
      }
    }
}

TEST(Gegenbauer, FloatEvalMatchesBoost) {
  // Three-term recurrence as an independent reference.
  for (int two_k : {2, 5, 10})
    for (double t : {-0.9, 0.1, 0.7}) {
      const double k = two_k / 2.0;
      double c0 = 1.0, c1 = 2 * k * t;
      for (int m = 2; m <= 9; ++m) {
        const double c2 = (2 * t * (m + k - 1) * c1 - (m + 2 * k - 2) * c0) / m;
        c0 = c1;
        c1 = c2;
        EXPECT_NEAR(gegenbauer_eval(two_k, m, t), c1, 1e-10 * std::max(1.0, std::abs(c1)));
      }
    }
}

TEST(Gegenbauer, NormalizerSquared) {
  for (int n : {4, 5, 9, 30}) EXPECT_EQ(harmonic_normalizer_squared(n, 1), Rational(n) / Rational((n - 2) * (n - 2)));
  EXPECT_THROW(harmonic_normalizer_squared(3, 1), std::invalid_argument);
  double prev = 1e9;
  for (int n : {100, 1000, 10000, 100000}) {
    const double v = (harmonic_normalizer_squared(n, 3) * pow(Rational(n), 3)).to_double();
    EXPECT_LT(std::abs(v - 6.0), prev);
    prev = std::abs(v - 6.0);
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Gegenbauer, ExactNormalizationAndStokes) {
  const EigenfunctionSpec p = make_gegenbauer(6, 3, RationalVector{0, 0, 0, 0, 0, 1});
  EXPECT_EQ(polynomial_expectation(squared_polynomial(p)), Rational(1));
  EXPECT_EQ(polynomial_expectation(gradient_norm_squared_polynomial(p)), Rational(21));
  EXPECT_EQ(polynomial_expectation(laplacian_pairing_polynomial(p)), Rational(21));
  const EigenfunctionSpec mix =
      make_gegenbauer(5, 3, RationalVector{Rational::parse("3/5"), 0, Rational::parse("-4/5"), 0, 0});
  EXPECT_EQ(polynomial_expectation(squared_polynomial(mix)), Rational(1));
  EXPECT_EQ(polynomial_expectation(gradient_norm_squared_polynomial(mix)), Rational(3 * 6));
}

TEST(Gegenbauer, Orthogonality) {
  // With a = (3/5, 4/5), E p^2 = 1 + (24/25) E[p^(1) p^(2)], so E p^2 = 1 iff the cross term vanishes.
  for (int ell : {1, 3, 5}) {
    const EigenfunctionSpec p = make_gegenbauer(4, ell, RationalVector{Rational::parse("3/5"), Rational::parse("4/5"), 0, 0});
    EXPECT_EQ(polynomial_expectation(squared_polynomial(p)), Rational(1)) << "ell=" << ell;
  }
}

TEST(Gegenbauer, EvalAtPole) {
  const int n = 7, ell = 5;
  std::vector<double> a(n, 0.0);
  a[n - 1] = 1.0;
  const EigenfunctionSpec p = make_gegenbauer(n, ell, a);
  const double expected = std::sqrt(harmonic_normalizer_squared(n, ell).to_double()) *
                          gegenbauer_eval(n - 2, ell, Rational(1)).to_double();
  EXPECT_NEAR(eval(p, unit(n, n - 1)), expected, 1e-12 * std::abs(expected));
}

TEST(Gegenbauer, Rejections) {
  EXPECT_THROW(make_gegenbauer(6, 2, std::vector<double>(6, 1 / std::sqrt(6.0))), std::invalid_argument);
  EXPECT_THROW(make_gegenbauer(3, 1, std::vector<double>(3, 1 / std::sqrt(3.0))), std::invalid_argument);
  EXPECT_THROW(make_gegenbauer(4, 3, std::vector<double>(4, 0.4)), std::invalid_argument);
  EXPECT_THROW(make_gegenbauer(4, 3, RationalVector{1, 1, 0, 0}), std::invalid_argument);
}

TEST(GradientNorm, NumericMatchesExactPolynomial) {
  std::mt19937_64 rng(11);
  const EigenfunctionSpec specs[] = {
      make_quadratic(random_traceless(6, rng)),
      make_gegenbauer(5, 3, RationalVector{Rational::parse("3/5"), 0, Rational::parse("-4/5"), 0, 0}),
  };
  SeededStream s(3, 3);
  for (const auto& f : specs) {
    const SpherePolynomial g = gradient_norm_squared_polynomial(f);
    const int n = ambient_dimension(f);
    for (int i = 0; i < 100; ++i) {
      const auto x = sample_sphere(n, s);
      const double exact = g.evaluate(x);
      EXPECT_NEAR(gradient_norm_squared(f, x), exact, 1e-10 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(Torus, SingleFrequency) {
  const EigenfunctionSpec f = make_torus(identity(3), {basis(3, 0)}, {std::sqrt(2.0)});
  const double zero[3] = {0, 0, 0};
  EXPECT_NEAR(eval(f, zero), std::sqrt(2.0), 1e-15);
  for (double x1 : {0.1, 0.37, 0.8}) {
    const double x[3] = {x1, 0.5, 0.25};
    const double s = std::sin(2 * kPi * x1);
    EXPECT_NEAR(gradient_norm_squared(f, x), 8 * kPi * kPi * s * s, 1e-10);
  }
  const double far[3] = {3.1, -2.5, 7.25};
  const double near[3] = {0.1, 0.5, 0.25};
  EXPECT_NEAR(eval(f, far), eval(f, near), 1e-12);
}

TEST(Torus, EigenrelationByFiniteDifferences) {
  RationalMatrix b = identity(3);
  b[0][0] = 2;
  b[0][1] = b[1][0] = 1;
  // Bv integral: v = (1, -1, 0) -> Bv = (1, -1, 0); v = (0, 0, 1) -> (0, 0, 1).
  const TorusCombo t = make_torus(b, {RationalVector{1, -1, 0}, RationalVector{0, 0, 1}}, {1.2, std::sqrt(2 - 1.44)});
  const EigenfunctionSpec f = t;
  const Eigen::MatrixXd binv = t.metric->inverse();
  SeededStream s(5, 5);
  const double h = 1e-4;
  for (int k = 0; k < 20; ++k) {
    const auto x = sample_torus(3, s);
    double lap = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        auto at = [&](double di, double dj) {
          std::vector<double> y = x;
          y[static_cast<std::size_t>(i)] += di;
          y[static_cast<std::size_t>(j)] += dj;
          return eval(f, y);
        };
        const double second = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
        lap += binv(i, j) * second;
      }
    const double expected = laplacian(f, x);
    double ref = 0.0;
    for (std::size_t v = 0; v < 2; ++v) ref = std::max(ref, t.mu(v));
    EXPECT_NEAR(lap, expected, 1e-6 * ref);
    // -sum a_v mu_v cos(.) is the per-frequency eigenrelation.
    double direct = 0.0;
    for (std::size_t v = 0; v < 2; ++v) {
      double phase = 0.0;
      for (const auto& [idx, bv] : t.frequencies[v].bv_sparse) phase += static_cast<double>(bv) * x[static_cast<std::size_t>(idx)];
      direct -= t.a[v] * t.mu(v) * std::cos(2 * kPi * phase);
    }
    EXPECT_NEAR(expected, direct, 1e-9 * ref);
  }
}

TEST(Torus, Rejections) {
  const double r2 = std::sqrt(2.0);
  EXPECT_THROW(make_torus(identity(2), {}, {}), std::invalid_argument);
  EXPECT_THROW(make_torus(identity(2), {basis(2, 0)}, {1.0}), std::invalid_argument);
  EXPECT_THROW(make_torus(identity(2), {basis(2, 0), RationalVector{-1, 0}}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(make_torus(identity(2), {RationalVector{Rational::parse("1/2"), 0}}, {r2}), std::invalid_argument);
  RationalMatrix bad = identity(2);
  bad[1][1] = -1;
  EXPECT_THROW(make_torus(bad, {basis(2, 0)}, {r2}), std::invalid_argument);
}

TEST(SpecJson, RoundTripAllFamilies) {
  const EigenfunctionSpec specs[] = {
      make_quadratic({Rational(2), Rational(-1), Rational(-1)}),
      make_gegenbauer(5, 3, RationalVector{Rational::parse("3/5"), 0, Rational::parse("-4/5"), 0, 0}),
      make_torus(identity(2), {basis(2, 0), basis(2, 1)}, {1.0, 1.0}),
  };
  for (const auto& s : specs) {
    const Json j = spec_to_json(s);
    const EigenfunctionSpec back = spec_from_json(j);
    EXPECT_EQ(family_name(back), family_name(s));
    EXPECT_EQ(spec_to_json(back).dump(), j.dump());
  }
  EXPECT_THROW(spec_from_json(Json{{"family", "quadratic"}, {"d", {1, 1}}}), std::invalid_argument);
  EXPECT_THROW(spec_from_json(Json{{"family", "elliptic"}}), std::invalid_argument);
}

TEST(SpectralComponents, WeightsAndMean) {
  const EigenfunctionSpec f = make_torus(identity(2), {basis(2, 0), RationalVector{1, 1}}, {1.0, 1.0});
  const auto comps = spectral_components(f);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_DOUBLE_EQ(comps[0].weight + comps[1].weight, 1.0);
  EXPECT_NEAR(mean_eigenvalue(f), 4 * kPi * kPi * 1.5, 1e-12);
  EXPECT_FALSE(is_single_eigenvalue(f));
  EXPECT_TRUE(is_single_eigenvalue(make_quadratic({Rational(1), Rational(-1)})));
}
