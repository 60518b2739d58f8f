#include "steinlab/sphere_moments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "steinlab/exact_arith.hpp"

namespace steinlab {

MultiIndex::MultiIndex(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("MultiIndex: dimension must be positive");
}

MultiIndex::MultiIndex(int dimension, std::vector<Factor> factors) : MultiIndex(dimension) {
  std::sort(factors.begin(), factors.end());
  for (const auto& [var, e] : factors) {
    if (var < 0 || var >= dimension)
      throw std::invalid_argument("MultiIndex: variable " + std::to_string(var) +
                                  " outside dimension " + std::to_string(dimension));
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    if (e == 0) continue;
    if (!factors_.empty() && factors_.back().first == var)
      factors_.back().second += e;
    else
      factors_.emplace_back(var, e);
  }
}

MultiIndex MultiIndex::from_dense(std::span<const int> exponents) {
  std::vector<Factor> f;
  for (std::size_t i = 0; i < exponents.size(); ++i)
    if (exponents[i] != 0) f.emplace_back(static_cast<int>(i), exponents[i]);
  return MultiIndex(static_cast<int>(exponents.size()), std::move(f));
}

int MultiIndex::exponent(int variable) const {
  for (const auto& [var, e] : factors_)
    if (var == variable) return e;
  return 0;
}

int MultiIndex::total_degree() const {
  int d = 0;
  for (const auto& f : factors_) d += f.second;
  return d;
}

bool MultiIndex::has_odd_exponent() const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [](const Factor& f) { return f.second % 2 != 0; });
}

MultiIndex MultiIndex::operator*(const MultiIndex& rhs) const {
  if (dimension_ != rhs.dimension_)
    throw std::invalid_argument("MultiIndex: dimension mismatch in product");
  MultiIndex out;
  out.dimension_ = dimension_;
  out.factors_.reserve(factors_.size() + rhs.factors_.size());
  auto a = factors_.begin();
  auto b = rhs.factors_.begin();
  while (a != factors_.end() || b != rhs.factors_.end()) {
    if (b == rhs.factors_.end() || (a != factors_.end() && a->first < b->first)) {
      out.factors_.push_back(*a++);
    } else if (a == factors_.end() || b->first < a->first) {
      out.factors_.push_back(*b++);
    } else {
      out.factors_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  return out;
}

namespace {

void require_sphere_dimension(int n) {
  if (n < 2)
    throw std::invalid_argument("sphere moments need n >= 2, got n = " + std::to_string(n));
}

}  // namespace

Rational monomial_moment(const MultiIndex& alpha) {
  const int n = alpha.dimension();
  require_sphere_dimension(n);
  if (alpha.has_odd_exponent()) return 0;

  // Numerator: Gamma(b_i) over the support, Gamma(1/2) = sqrt(pi) for every
  // variable with a zero exponent, and Gamma(n/2).
  Rational coeff = 1;
  int sqrt_pi = 0;
  for (const auto& [var, e] : alpha.factors()) {
    const HalfGamma g = gamma_half(e + 1);
    coeff *= g.coeff;
    sqrt_pi += g.sqrt_pi_power;
  }
  sqrt_pi += n - static_cast<int>(alpha.factors().size());
  const HalfGamma gn = gamma_half(n);
  coeff *= gn.coeff;
  sqrt_pi += gn.sqrt_pi_power;

  // Denominator: Gamma(sum b_i) pi^{n/2}; sum b_i = (|alpha| + n)/2.
  const HalfGamma gs = gamma_half(alpha.total_degree() + n);
  coeff /= gs.coeff;
  sqrt_pi -= gs.sqrt_pi_power + n;
  if (sqrt_pi != 0) throw std::logic_error("monomial_moment: sqrt(pi) powers failed to cancel");
  return coeff;
}

Rational monomial_moment_closed_form(const MultiIndex& alpha) {
  const int n = alpha.dimension();
  require_sphere_dimension(n);
  if (alpha.has_odd_exponent()) return 0;
  BigInt num = 1;
  for (const auto& [var, e] : alpha.factors()) num *= double_factorial(e - 1);
  BigInt den = 1;
  const int half_degree = alpha.total_degree() / 2;
  for (int j = 0; j < half_degree; ++j) den *= n + 2 * j;
  return Rational(num, den);
}

Rational diagonal_form_moment(int n, std::span<const RationalVector> forms) {
  require_sphere_dimension(n);
  const std::size_t m = forms.size();
  if (m == 0) return 1;
  if (m > 12) throw std::invalid_argument("diagonal_form_moment: too many factors");
  for (const auto& c : forms)
    if (c.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("diagonal_form_moment: form length differs from n");

  // Joint cumulant of the Gaussian quadratic forms indexed by each subset.
  const std::size_t subsets = std::size_t{1} << m;
  std::vector<Rational> cumulant(subsets);
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    Rational sum = 0;
    for (int i = 0; i < n; ++i) {
      Rational prod = 1;
      for (std::size_t r = 0; r < m && !prod.is_zero(); ++r)
        if (mask & (std::size_t{1} << r)) prod *= forms[r][i];
      sum += prod;
    }
    const int k = std::popcount(mask);
    BigInt scale = factorial(k - 1);
    scale <<= k - 1;
    cumulant[mask] = sum * Rational(scale);
  }

  // Moment-cumulant formula over set partitions (restricted growth strings).
  Rational gaussian_moment = 0;
  std::vector<std::size_t> blocks;
  std::function<void(std::size_t)> visit = [&](std::size_t r) {
    if (r == m) {
      Rational prod = 1;
      for (std::size_t b : blocks) prod *= cumulant[b];
      gaussian_moment += prod;
      return;
    }
    const std::size_t bit = std::size_t{1} << r;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b] |= bit;
      visit(r + 1);
      blocks[b] &= ~bit;
    }
    blocks.push_back(bit);
    visit(r + 1);
    blocks.pop_back();
  };
  visit(0);

  BigInt radial = 1;
  for (std::size_t j = 0; j < m; ++j) radial *= n + 2 * static_cast<long>(j);
  return gaussian_moment / Rational(radial);
}

SpherePolynomial::SpherePolynomial(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("SpherePolynomial: dimension must be positive");
}

SpherePolynomial SpherePolynomial::constant(int dimension, const Rational& c) {
  SpherePolynomial p(dimension);
  p.add_term(MultiIndex(dimension), c);
  return p;
}

SpherePolynomial SpherePolynomial::variable(int dimension, int index) {
  return monomial(MultiIndex(dimension, {{index, 1}}), 1);
}

SpherePolynomial SpherePolynomial::monomial(const MultiIndex& alpha, const Rational& c) {
  SpherePolynomial p(alpha.dimension());
  p.add_term(alpha, c);
  return p;
}

SpherePolynomial SpherePolynomial::univariate(int dimension, int var,
                                              std::span<const Rational> coeffs) {
  SpherePolynomial p(dimension);
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    p.add_term(MultiIndex(dimension, {{var, static_cast<int>(j)}}), coeffs[j]);
  return p;
}

int SpherePolynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.total_degree());
  return d;
}

void SpherePolynomial::add_term(const MultiIndex& alpha, const Rational& c) {
  if (alpha.dimension() != dimension_)
    throw std::invalid_argument("SpherePolynomial: term dimension mismatch");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

void SpherePolynomial::check_dimension(const SpherePolynomial& other) const {
  if (other.dimension_ != dimension_)
    throw std::invalid_argument("SpherePolynomial: dimension mismatch");
}

SpherePolynomial& SpherePolynomial::operator+=(const SpherePolynomial& rhs) {
  check_dimension(rhs);
  for (const auto& [alpha, c] : rhs.terms_) add_term(alpha, c);
  return *this;
}

SpherePolynomial& SpherePolynomial::operator-=(const SpherePolynomial& rhs) {
  check_dimension(rhs);
  for (const auto& [alpha, c] : rhs.terms_) add_term(alpha, -c);
  return *this;
}

SpherePolynomial& SpherePolynomial::operator*=(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, coeff] : terms_) coeff *= c;
  return *this;
}

SpherePolynomial operator*(const SpherePolynomial& a, const SpherePolynomial& b) {
  a.check_dimension(b);
  SpherePolynomial out(a.dimension_);
  for (const auto& [alpha, ca] : a.terms_)
    for (const auto& [beta, cb] : b.terms_) out.add_term(alpha * beta, ca * cb);
  return out;
}

SpherePolynomial SpherePolynomial::derivative(int var) const {
  SpherePolynomial out(dimension_);
  for (const auto& [alpha, c] : terms_) {
    const int e = alpha.exponent(var);
    if (e == 0) continue;
    std::vector<MultiIndex::Factor> f(alpha.factors().begin(), alpha.factors().end());
    for (auto& [v, ex] : f)
      if (v == var) --ex;
    out.add_term(MultiIndex(dimension_, std::move(f)), c * Rational(e));
  }
  return out;
}

SpherePolynomial SpherePolynomial::laplacian() const {
  SpherePolynomial out(dimension_);
  for (const auto& [alpha, c] : terms_) {
    for (const auto& [var, e] : alpha.factors()) {
      if (e < 2) continue;
      std::vector<MultiIndex::Factor> f(alpha.factors().begin(), alpha.factors().end());
      for (auto& [v, ex] : f)
        if (v == var) ex -= 2;
      out.add_term(MultiIndex(dimension_, std::move(f)), c * Rational(e * (e - 1)));
    }
  }
  return out;
}

SpherePolynomial SpherePolynomial::spherical_laplacian() const {
  SpherePolynomial out = laplacian();
  for (const auto& [alpha, c] : terms_) {
    const long d = alpha.total_degree();
    out.add_term(alpha, -c * Rational(d * d + (dimension_ - 2) * d));
  }
  return out;
}

double SpherePolynomial::evaluate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw std::invalid_argument("SpherePolynomial::evaluate: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) {
    double term = c.to_double();
    for (const auto& [var, e] : alpha.factors()) term *= std::pow(x[var], e);
    sum += term;
  }
  return sum;
}

Rational SpherePolynomial::evaluate(std::span<const Rational> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw std::invalid_argument("SpherePolynomial::evaluate: point dimension mismatch");
  Rational sum = 0;
  for (const auto& [alpha, c] : terms_) {
    Rational term = c;
    for (const auto& [var, e] : alpha.factors()) term *= pow(x[var], static_cast<unsigned>(e));
    sum += term;
  }
  return sum;
}

SpherePolynomial spherical_gradient_norm_squared(const SpherePolynomial& q) {
  const int n = q.dimension();
  SpherePolynomial ambient(n);
  SpherePolynomial radial(n);
  for (int i = 0; i < n; ++i) {
    SpherePolynomial di = q.derivative(i);
    if (di.is_zero()) continue;
    ambient += di * di;
    radial += SpherePolynomial::variable(n, i) * di;
  }
  return ambient - radial * radial;
}

Rational polynomial_expectation(const SpherePolynomial& p) {
  Rational sum = 0;
  for (const auto& [alpha, c] : p.terms()) {
    if (alpha.has_odd_exponent()) continue;
    sum += c * monomial_moment(alpha);
  }
  return sum;
}

}  // namespace steinlab
