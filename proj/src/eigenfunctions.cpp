#include "steinlab/eigenfunctions.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "steinlab/exact_arith.hpp"

namespace steinlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double horner(const std::vector<double>& coeffs, double t) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

void check_sphere_point(int n, std::span<const double> x) { Geometry::sphere(n).check_point(x); }

void check_torus_point(int n, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("point has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(n));
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("point has a non-finite coordinate");
}

std::vector<double> reduced_torus_point(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = wrap_unit(x[i]);
  return out;
}

// <Bv, x> reduced to [-1/2, 1/2] so that cos/sin see a small argument.
double torus_phase(const TorusFrequency& f, std::span<const double> x) {
  double phase = 0.0;
  for (const auto& [j, k] : f.bv_sparse) phase += static_cast<double>(k) * x[static_cast<std::size_t>(j)];
  return phase - std::nearbyint(phase);
}

double quadratic_value(const QuadraticHarmonic& q, std::span<const double> x) {
  double s = 0.0;
  for (int i = 0; i < q.n; ++i) s += q.d_double[static_cast<std::size_t>(i)] * x[i] * x[i];
  return q.c * s;
}

double quadratic_gradient(const QuadraticHarmonic& q, std::span<const double> x) {
  // |grad|^2 = 4 C^2 (sum d_i^2 x_i^2 - (sum d_i x_i^2)^2) on the unit sphere.
  double p = 0.0, s = 0.0;
  for (int i = 0; i < q.n; ++i) {
    const double d = q.d_double[static_cast<std::size_t>(i)];
    const double y = x[i] * x[i];
    p += d * d * y;
    s += d * y;
  }
  return std::max(0.0, 4.0 * q.c * q.c * (p - s * s));
}

double gegenbauer_value(const GegenbauerCombo& g, std::span<const double> x) {
  double s = 0.0;
  for (int k = 0; k < g.n; ++k) {
    const double a = g.a[static_cast<std::size_t>(k)];
    if (a != 0.0) s += a * horner(g.value_coeffs, x[k]);
  }
  return s;
}

double gegenbauer_gradient(const GegenbauerCombo& g, std::span<const double> x) {
  double ambient = 0.0, radial = 0.0;
  for (int k = 0; k < g.n; ++k) {
    const double a = g.a[static_cast<std::size_t>(k)];
    if (a == 0.0) continue;
    const double slope = a * horner(g.slope_coeffs, x[k]);
    ambient += slope * slope;
    radial += x[k] * slope;
  }
  return std::max(0.0, ambient - radial * radial);
}

double torus_value(const TorusCombo& t, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.frequencies.size(); ++i)
    s += t.a[i] * std::cos(kTwoPi * torus_phase(t.frequencies[i], x));
  return s;
}

double torus_gradient(const TorusCombo& t, std::span<const double> x) {
  // grad_B f = -2 pi B^{-1} sum a_v sin(.) Bv = -2 pi w, w = sum a_v sin(.) v;
  // |grad_B f|_B^2 = (2 pi)^2 <w, B w> with B w = sum a_v sin(.) Bv.
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0), bw(n, 0.0);
  for (std::size_t i = 0; i < t.frequencies.size(); ++i) {
    const TorusFrequency& f = t.frequencies[i];
    const double s = t.a[i] * std::sin(kTwoPi * torus_phase(f, x));
    if (s == 0.0) continue;
    for (const auto& [j, v] : f.v_sparse) w[static_cast<std::size_t>(j)] += s * v;
    for (const auto& [j, k] : f.bv_sparse) bw[static_cast<std::size_t>(j)] += s * static_cast<double>(k);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * bw[j];
  return std::max(0.0, kTwoPi * kTwoPi * acc);
}

// Exact representation p = sqrt(scale) * q with q Rational.
struct ExactForm {
  SpherePolynomial q;
  Rational scale;
};

ExactForm exact_form(const EigenfunctionSpec& spec) {
  return std::visit(
      Overloaded{
          [](const QuadraticHarmonic& h) {
            SpherePolynomial q(h.n);
            for (int i = 0; i < h.n; ++i)
              q.add_term(MultiIndex(h.n, {{i, 2}}), h.d[static_cast<std::size_t>(i)]);
            return ExactForm{std::move(q), h.c_squared};
          },
          [](const GegenbauerCombo& g) {
            if (!g.a_exact)
              throw std::invalid_argument("exact polynomial path needs Rational coefficients a");
            SpherePolynomial q(g.n);
            for (int k = 0; k < g.n; ++k) {
              const Rational& a = (*g.a_exact)[static_cast<std::size_t>(k)];
              if (a.is_zero()) continue;
              q += SpherePolynomial::univariate(g.n, k, g.zonal) * a;
            }
            return ExactForm{std::move(q), g.normalizer_squared};
          },
          [](const TorusCombo&) -> ExactForm {
            throw std::invalid_argument("exact polynomial path is only defined on the sphere");
          }},
      spec);
}

}  // namespace

QuadraticHarmonic make_quadratic(RationalVector d) {
  const int n = static_cast<int>(d.size());
  if (n < 2) throw std::invalid_argument("make_quadratic: n must be at least 2");
  Rational trace, norm2;
  for (const Rational& v : d) {
    trace += v;
    norm2 += v * v;
  }
  if (!trace.is_zero())
    throw std::invalid_argument("make_quadratic: spectrum must have zero trace, got " + trace.str());
  if (norm2.is_zero()) throw std::invalid_argument("make_quadratic: spectrum must be nonzero");
  QuadraticHarmonic q;
  q.n = n;
  q.c_squared = Rational(n) * Rational(n + 2) / (Rational(2) * norm2);
  q.c = std::sqrt(q.c_squared.to_double());
  q.d_double.reserve(d.size());
  for (const Rational& v : d) q.d_double.push_back(v.to_double());
  q.d = std::move(d);
  return q;
}

QuadraticHarmonic make_quadratic_from_matrix(const Eigen::MatrixXd& a, double tolerance) {
  if (a.rows() != a.cols() || a.rows() < 2)
    throw std::invalid_argument("make_quadratic_from_matrix: need a square matrix with n >= 2");
  const double scale = std::max(1.0, a.norm());
  if ((a - a.transpose()).norm() > tolerance * scale)
    throw std::invalid_argument("make_quadratic_from_matrix: matrix is not symmetric");
  if (std::abs(a.trace()) > tolerance * scale)
    throw std::invalid_argument("make_quadratic_from_matrix: matrix must have zero trace");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()),
                                                           Eigen::EigenvaluesOnly);
  const Eigen::Index n = a.rows();
  RationalVector d;
  d.reserve(static_cast<std::size_t>(n));
  Rational sum;
  for (Eigen::Index i = 0; i < n; ++i) {
    d.push_back(Rational::from_double(eig.eigenvalues()[i]));
    sum += d.back();
  }
  const Rational mean = sum / Rational(static_cast<long>(n));
  for (Rational& v : d) v -= mean;
  return make_quadratic(std::move(d));
}

RationalVector gegenbauer_coefficients(int two_k, int m) {
  if (two_k < 1) throw std::invalid_argument("gegenbauer: k_times_two must be >= 1");
  if (m < 0) throw std::invalid_argument("gegenbauer: degree must be >= 0");
  RationalVector coeffs(static_cast<std::size_t>(m) + 1);
  const HalfGamma gamma_k = gamma_half(two_k);
  for (int j = 0; 2 * j <= m; ++j) {
    // Gamma(k + m - j) / Gamma(k); the sqrt(pi) powers agree.
    const HalfGamma top = gamma_half(two_k + 2L * (m - j));
    Rational c = top.coeff / gamma_k.coeff;
    c *= pow(Rational(2), static_cast<unsigned>(m));
    c /= pow(Rational(4), static_cast<unsigned>(j));
    c /= Rational(factorial(j)) * Rational(factorial(m - 2 * j));
    if (j % 2 == 1) c = -c;
    coeffs[static_cast<std::size_t>(m - 2 * j)] = c;
  }
  return coeffs;
}

Rational gegenbauer_eval(int two_k, int m, const Rational& t) {
  const RationalVector c = gegenbauer_coefficients(two_k, m);
  Rational acc;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double gegenbauer_eval(int two_k, int m, double t) {
  const RationalVector c = gegenbauer_coefficients(two_k, m);
  std::vector<double> cd;
  cd.reserve(c.size());
  for (const Rational& v : c) cd.push_back(v.to_double());
  return horner(cd, t);
}

Rational harmonic_normalizer_squared(int n, int ell) {
  if (n < 4) throw std::invalid_argument("harmonic_normalizer_squared: n must be at least 4");
  if (ell < 1) throw std::invalid_argument("harmonic_normalizer_squared: ell must be at least 1");
  const BigInt num = factorial(n - 3) * factorial(ell) * (n + 2 * ell - 2);
  const BigInt den = factorial(n + ell - 3) * (n - 2);
  return Rational(num, den);
}

namespace {

GegenbauerCombo gegenbauer_common(int n, int ell) {
  if (n < 4) throw std::invalid_argument("make_gegenbauer: n must be at least 4");
  if (ell < 1 || ell % 2 == 0) throw std::invalid_argument("make_gegenbauer: ell must be odd and positive");
  GegenbauerCombo g;
  g.n = n;
  g.ell = ell;
  g.normalizer_squared = harmonic_normalizer_squared(n, ell);
  g.normalizer = std::sqrt(g.normalizer_squared.to_double());
  g.zonal = gegenbauer_coefficients(n - 2, ell);
  for (const Rational& c : g.zonal) g.value_coeffs.push_back(g.normalizer * c.to_double());
  for (std::size_t p = 1; p < g.value_coeffs.size(); ++p)
    g.slope_coeffs.push_back(static_cast<double>(p) * g.value_coeffs[p]);
  return g;
}

}  // namespace

GegenbauerCombo make_gegenbauer(int n, int ell, std::vector<double> a, double tolerance) {
  GegenbauerCombo g = gegenbauer_common(n, ell);
  if (a.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("make_gegenbauer: need one coefficient per coordinate");
  double norm2 = 0.0;
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument("make_gegenbauer: non-finite coefficient");
    norm2 += v * v;
  }
  if (std::abs(norm2 - 1.0) > tolerance)
    throw std::invalid_argument("make_gegenbauer: coefficients must satisfy sum a_k^2 = 1");
  g.a = std::move(a);
  return g;
}

GegenbauerCombo make_gegenbauer(int n, int ell, RationalVector a) {
  GegenbauerCombo g = gegenbauer_common(n, ell);
  if (a.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("make_gegenbauer: need one coefficient per coordinate");
  Rational norm2;
  for (const Rational& v : a) norm2 += v * v;
  if (norm2 != Rational(1))
    throw std::invalid_argument("make_gegenbauer: coefficients must satisfy sum a_k^2 = 1 exactly");
  for (const Rational& v : a) g.a.push_back(v.to_double());
  g.a_exact = std::move(a);
  return g;
}

double TorusCombo::mu(std::size_t i) const {
  return kTwoPi * kTwoPi * frequencies.at(i).norm_squared.to_double();
}

TorusCombo make_torus(RationalMatrix b, std::vector<RationalVector> frequencies,
                      std::vector<double> a, double tolerance) {
  auto metric = std::make_shared<const TorusMetric>(std::move(b));
  const int n = metric->dimension();
  if (frequencies.empty()) throw std::invalid_argument("make_torus: frequency set V is empty");
  if (a.size() != frequencies.size())
    throw std::invalid_argument("make_torus: need one coefficient per frequency");
  double norm2 = 0.0;
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument("make_torus: non-finite coefficient");
    norm2 += v * v;
  }
  if (std::abs(norm2 - 2.0) > tolerance)
    throw std::invalid_argument("make_torus: coefficients must satisfy |a|^2 = 2");

  std::set<RationalVector> seen;
  for (const RationalVector& v : frequencies) {
    if (v.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("make_torus: frequency has wrong dimension");
    if (!seen.insert(v).second) throw std::invalid_argument("make_torus: duplicate frequency");
  }
  for (const RationalVector& v : frequencies) {
    RationalVector neg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    if (seen.contains(neg))
      throw std::invalid_argument("make_torus: v + w = 0 for some v, w in V (zero frequency or opposite pair)");
  }

  TorusCombo t;
  t.metric = metric;
  t.a = std::move(a);
  const RationalMatrix& bm = metric->exact();
  for (RationalVector& v : frequencies) {
    TorusFrequency f;
    Rational norm;
    for (int i = 0; i < n; ++i) {
      Rational bv;
      for (int j = 0; j < n; ++j) {
        const Rational& vj = v[static_cast<std::size_t>(j)];
        if (!vj.is_zero()) bv += bm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * vj;
      }
      if (!bv.is_integer()) throw std::invalid_argument("make_torus: Bv must be an integer vector");
      if (!bv.is_zero()) {
        if (!bv.numerator().fits_slong_p())
          throw std::invalid_argument("make_torus: Bv entry out of range");
        f.bv_sparse.emplace_back(i, bv.numerator().get_si());
      }
      const Rational& vi = v[static_cast<std::size_t>(i)];
      if (!vi.is_zero()) {
        f.v_sparse.emplace_back(i, vi.to_double());
        norm += bv * vi;
      }
    }
    f.norm_squared = norm;
    f.v = std::move(v);
    t.frequencies.push_back(std::move(f));
  }
  return t;
}

std::string family_name(const EigenfunctionSpec& spec) {
  return std::visit(Overloaded{[](const QuadraticHarmonic&) { return std::string("quadratic"); },
                               [](const GegenbauerCombo&) { return std::string("gegenbauer"); },
                               [](const TorusCombo&) { return std::string("torus"); }},
                    spec);
}

int ambient_dimension(const EigenfunctionSpec& spec) {
  return std::visit(Overloaded{[](const QuadraticHarmonic& q) { return q.n; },
                               [](const GegenbauerCombo& g) { return g.n; },
                               [](const TorusCombo& t) { return t.n(); }},
                    spec);
}

Geometry geometry_of(const EigenfunctionSpec& spec) {
  if (const auto* t = std::get_if<TorusCombo>(&spec)) return Geometry::torus(t->metric);
  return Geometry::sphere(ambient_dimension(spec));
}

std::vector<SpectralComponent> spectral_components(const EigenfunctionSpec& spec) {
  return std::visit(
      Overloaded{[](const QuadraticHarmonic& q) {
                   return std::vector<SpectralComponent>{{1.0, q.eigenvalue()}};
                 },
                 [](const GegenbauerCombo& g) {
                   return std::vector<SpectralComponent>{{1.0, g.eigenvalue()}};
                 },
                 [](const TorusCombo& t) {
                   std::vector<SpectralComponent> out;
                   for (std::size_t i = 0; i < t.frequencies.size(); ++i)
                     out.push_back({t.a[i] * t.a[i] / 2.0, t.mu(i)});
                   return out;
                 }},
      spec);
}

double mean_eigenvalue(const EigenfunctionSpec& spec) {
  const auto comps = spectral_components(spec);
  double s = 0.0;
  for (const auto& c : comps) s += c.mu;
  return s / static_cast<double>(comps.size());
}

bool is_single_eigenvalue(const EigenfunctionSpec& spec) {
  const auto* t = std::get_if<TorusCombo>(&spec);
  if (!t) return true;
  for (const auto& f : t->frequencies)
    if (f.norm_squared != t->frequencies.front().norm_squared) return false;
  return true;
}

double eval_unchecked(const EigenfunctionSpec& spec, std::span<const double> x) {
  return std::visit(Overloaded{[&](const QuadraticHarmonic& q) { return quadratic_value(q, x); },
                               [&](const GegenbauerCombo& g) { return gegenbauer_value(g, x); },
                               [&](const TorusCombo& t) { return torus_value(t, x); }},
                    spec);
}

double gradient_norm_squared_unchecked(const EigenfunctionSpec& spec, std::span<const double> x) {
  return std::visit(Overloaded{[&](const QuadraticHarmonic& q) { return quadratic_gradient(q, x); },
                               [&](const GegenbauerCombo& g) { return gegenbauer_gradient(g, x); },
                               [&](const TorusCombo& t) { return torus_gradient(t, x); }},
                    spec);
}

double eval(const EigenfunctionSpec& spec, std::span<const double> x) {
  const int n = ambient_dimension(spec);
  if (std::holds_alternative<TorusCombo>(spec)) {
    check_torus_point(n, x);
    const auto y = reduced_torus_point(x);
    return eval_unchecked(spec, y);
  }
  check_sphere_point(n, x);
  return eval_unchecked(spec, x);
}

double gradient_norm_squared(const EigenfunctionSpec& spec, std::span<const double> x) {
  const int n = ambient_dimension(spec);
  if (std::holds_alternative<TorusCombo>(spec)) {
    check_torus_point(n, x);
    const auto y = reduced_torus_point(x);
    return gradient_norm_squared_unchecked(spec, y);
  }
  check_sphere_point(n, x);
  return gradient_norm_squared_unchecked(spec, x);
}

double laplacian(const EigenfunctionSpec& spec, std::span<const double> x) {
  const int n = ambient_dimension(spec);
  if (const auto* t = std::get_if<TorusCombo>(&spec)) {
    check_torus_point(n, x);
    const auto y = reduced_torus_point(x);
    double s = 0.0;
    for (std::size_t i = 0; i < t->frequencies.size(); ++i)
      s -= t->a[i] * t->mu(i) * std::cos(kTwoPi * torus_phase(t->frequencies[i], y));
    return s;
  }
  check_sphere_point(n, x);
  return -spectral_components(spec).front().mu * eval_unchecked(spec, x);
}

SpherePolynomial squared_polynomial(const EigenfunctionSpec& spec) {
  const ExactForm e = exact_form(spec);
  return (e.q * e.q) * e.scale;
}

SpherePolynomial gradient_norm_squared_polynomial(const EigenfunctionSpec& spec) {
  const ExactForm e = exact_form(spec);
  return spherical_gradient_norm_squared(e.q) * e.scale;
}

SpherePolynomial laplacian_pairing_polynomial(const EigenfunctionSpec& spec) {
  const ExactForm e = exact_form(spec);
  SpherePolynomial minus_lap = e.q.spherical_laplacian() * Rational(-1);
  return (e.q * minus_lap) * e.scale;
}

}  // namespace steinlab
