#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/eigenfunctions.hpp"
#include "steinlab/json_io.hpp"
#include "steinlab/rational.hpp"
#include "steinlab/sampling.hpp"

namespace steinlab {

// One labeled sub-term of a bound. When `radicand` is set the value is
// multiplier * sqrt(radicand), with the radicand exact.
struct BoundComponent {
  std::string label;
  double value = 0.0;
  std::optional<Rational> radicand;
  double multiplier = 1.0;
};

struct BoundReport {
  std::string family;
  std::string bound;         // which bound this is
  std::string method;        // "exact" or "monte-carlo"
  int n = 0;
  double mu = 0.0;
  double bound_value = 0.0;  // >= 0
  std::vector<BoundComponent> components;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  std::optional<std::uint64_t> seed;

  bool vacuous() const { return bound_value > 1.0; }
  const BoundComponent& component(const std::string& label) const;
  Json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

// (2/mu) E| |grad f|^2 - E|grad f|^2 | by Monte Carlo, plus the exact spread
// term (2/mu)(1 + sqrt(pi)/(2 sqrt 2)) sqrt(sum b_i^2 (mu_i - mu)^2) when the
// spec mixes eigenvalues. The centering uses the exact mean sum b_i^2 mu_i.
// Requires mu > 0 and N >= 1000.
BoundReport generic_bound_mc(const EigenfunctionSpec& spec, double mu, std::uint64_t samples,
                             const SeededStream& stream, unsigned workers = 0);

// 2 (1 + sqrt(pi) / (2 sqrt 2)), the eigenvalue-spread constant; times sqrt 2
// it equals 2 sqrt 2 + sqrt pi, the torus second-term constant.
double spread_constant();

// R = |d|_4^4 / |d|_2^4 for a traceless nonzero spectrum.
Rational quadratic_ratio(const RationalVector& d);

// Components: "theorem" sqrt(6R) (the bound value), "intermediate"
// sqrt((2 + 4/n) R + 2/n), "sharpened" sqrt((4 + 4/n) R).
BoundReport quadratic_bound(const RationalVector& d);

// Exact E|grad_S f|^2, E|grad_S f|^4 and their variance for the normalized
// quadratic harmonic with spectrum d.
struct QuadraticGradientMoments {
  Rational mean;
  Rational second_moment;
  Rational variance;
};
QuadraticGradientMoments quadratic_gradient_moments(const RationalVector& d);
Rational quadratic_variance_exact(const RationalVector& d);
// 8 n^2 R + 8 n (1 + 2R).
Rational quadratic_variance_displayed_bound(const RationalVector& d);

struct KeyFacts {
  int ell = 0;
  int n = 0;
  Rational fact1_exact;  // A^4 (n-2)^4 E[C^2(x_1) C^2(x_2)], C = C^{n/2}_{ell-1}
  double fact1_ratio = 0.0;  // fact1 / (ell^2 n^2)
  Rational fact2_exact;  // A^4 (n-2)^4 E[C^4(x_1)]
  double fact2_ratio = 0.0;  // fact2 / n^2
};
// ell odd >= 3, n >= 4.
KeyFacts degree_l_key_facts(int ell, int n);

// (1/mu) sqrt(E|grad p|^4 - mu^2) using the exact ambient fourth moment
// fact1 + (fact2 - fact1) |a|_4^4; also reports |a|_4^2.
BoundReport degree_l_bound(int ell, int n, const std::vector<double>& a);

// Exact sum over ordered pairs (v, w) in V x V of (v, w)_B^2.
Rational torus_gram_sum(const TorusCombo& t);
// (1 / (|V|(|V|+2))) sum (v, w)_B^2.
Rational torus_inner_quantity(const TorusCombo& t);
// (1/|V|) sum (|v|_B^2 - m)^2, eigenvalues in units of (2 pi)^2.
Rational torus_spread_radicand(const TorusCombo& t, const Rational& mu_scaled);
// mu / (2 pi)^2 defaulting to the mean of |v|_B^2.
Rational torus_default_mu_scaled(const TorusCombo& t);

// Components "first" = sqrt(8 S / (|V|(|V|+2))) / m and
// "second" = (2 sqrt 2 + sqrt pi) sqrt(spread) / m, mu = (2 pi)^2 m.
BoundReport torus_bound(const TorusCombo& t, std::optional<Rational> mu_scaled = std::nullopt);

// All e_i + e_j, i < j.
std::vector<RationalVector> pair_frequencies(int n);
// v' = (v_i / (1 + delta_i)) for the pair family, so that B v' = v is integral.
std::vector<RationalVector> scaled_pair_frequencies(const RationalVector& deltas);
RationalMatrix diagonal_metric(const RationalVector& deltas);
// max_i |1 - 1/(1 + delta_i)|.
Rational perturbation_epsilon(const RationalVector& deltas);
// (16 n - 12) / (n^2 - n + 4).
Rational pair_family_inner_upper(int n);

}  // namespace steinlab
