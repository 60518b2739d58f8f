#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "steinlab/rational.hpp"

namespace steinlab {

// Sparse exponent vector x_{i1}^{e1} x_{i2}^{e2} ... in n variables. Only
// positive exponents are stored, sorted by variable index.
class MultiIndex {
 public:
  using Factor = std::pair<int, int>;  // (variable, exponent)

  MultiIndex() = default;
  explicit MultiIndex(int dimension);
  // Merges repeated variables and drops zero exponents. Throws
  // std::invalid_argument on an out-of-range variable or negative exponent.
  MultiIndex(int dimension, std::vector<Factor> factors);
  static MultiIndex from_dense(std::span<const int> exponents);

  int dimension() const { return dimension_; }
  std::span<const Factor> factors() const { return factors_; }
  int exponent(int variable) const;
  int total_degree() const;
  bool has_odd_exponent() const;
  bool is_constant() const { return factors_.empty(); }

  MultiIndex operator*(const MultiIndex& rhs) const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  int dimension_ = 0;
  std::vector<Factor> factors_;
};

// E[prod x_i^alpha_i] for X uniform on S^{n-1}, n = alpha.dimension().
// Evaluated through the Gamma-ratio
//   Gamma(b_1)...Gamma(b_n) Gamma(n/2) / (Gamma(b_1 + ... + b_n) pi^{n/2}),
// b_i = (alpha_i + 1)/2, with all sqrt(pi) factors tracked exactly. Any odd
// exponent gives 0. Throws std::invalid_argument for n < 2.
Rational monomial_moment(const MultiIndex& alpha);

// Same expectation via prod (alpha_i - 1)!! / prod_{j<A} (n + 2j), A = |alpha|/2.
Rational monomial_moment_closed_form(const MultiIndex& alpha);

// E[prod_r (sum_i c_{r,i} x_i^2)] for X uniform on S^{n-1}. Each form is a
// length-n coefficient vector. Works in the eigenbasis without expanding the
// product: moments of diagonal forms in x^2 equal Gaussian quadratic-form
// moments divided by E|G|^{2m}, and the former follow from the joint
// cumulants 2^{k-1}(k-1)! sum_i prod c_{r,i} summed over set partitions.
Rational diagonal_form_moment(int n, std::span<const RationalVector> forms);

class SpherePolynomial {
 public:
  using TermMap = std::map<MultiIndex, Rational>;

  explicit SpherePolynomial(int dimension);
  static SpherePolynomial constant(int dimension, const Rational& c);
  static SpherePolynomial variable(int dimension, int index);
  static SpherePolynomial monomial(const MultiIndex& alpha, const Rational& c);
  // sum_j coeffs[j] * x_var^j
  static SpherePolynomial univariate(int dimension, int var, std::span<const Rational> coeffs);

  int dimension() const { return dimension_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  void add_term(const MultiIndex& alpha, const Rational& c);

  SpherePolynomial& operator+=(const SpherePolynomial& rhs);
  SpherePolynomial& operator-=(const SpherePolynomial& rhs);
  SpherePolynomial& operator*=(const Rational& c);
  friend SpherePolynomial operator+(SpherePolynomial a, const SpherePolynomial& b) { return a += b; }
  friend SpherePolynomial operator-(SpherePolynomial a, const SpherePolynomial& b) { return a -= b; }
  friend SpherePolynomial operator*(SpherePolynomial a, const Rational& c) { return a *= c; }
  friend SpherePolynomial operator*(const Rational& c, SpherePolynomial a) { return a *= c; }
  friend SpherePolynomial operator*(const SpherePolynomial& a, const SpherePolynomial& b);
  friend bool operator==(const SpherePolynomial&, const SpherePolynomial&) = default;

  SpherePolynomial derivative(int var) const;
  SpherePolynomial laplacian() const;
  // Laplace-Beltrami operator of the restriction to S^{n-1}:
  // Delta - E^2 - (n-2) E with E the Euler operator, valid for any extension.
  SpherePolynomial spherical_laplacian() const;

  double evaluate(std::span<const double> x) const;
  Rational evaluate(std::span<const Rational> x) const;

 private:
  void check_dimension(const SpherePolynomial& other) const;

  int dimension_;
  TermMap terms_;
};

// sum_i (d_i q)^2 - (sum_i x_i d_i q)^2: squared norm of the spherical
// gradient of q restricted to the sphere.
SpherePolynomial spherical_gradient_norm_squared(const SpherePolynomial& q);

// Exact E[p(X)], X uniform on S^{n-1}.
Rational polynomial_expectation(const SpherePolynomial& p);

}  // namespace steinlab
