#include "steinlab/stein_bounds.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "steinlab/exact_arith.hpp"
#include "steinlab/format.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/sphere_moments.hpp"

namespace steinlab {

namespace {

double sqrt_of(const Rational& r) { return std::sqrt(std::max(0.0, r.to_double())); }

BoundComponent rooted(std::string label, const Rational& radicand, double multiplier = 1.0) {
  return BoundComponent{std::move(label), multiplier * sqrt_of(radicand), radicand, multiplier};
}

void check_spectrum(const RationalVector& d) {
  if (d.size() < 2) throw std::invalid_argument("quadratic spectrum needs n >= 2");
  Rational trace, norm2;
  for (const Rational& v : d) {
    trace += v;
    norm2 += v * v;
  }
  if (!trace.is_zero()) throw std::invalid_argument("quadratic spectrum must have zero trace");
  if (norm2.is_zero()) throw std::invalid_argument("quadratic spectrum must be nonzero");
}

RationalVector squares(const RationalVector& d) {
  RationalVector out;
  out.reserve(d.size());
  for (const Rational& v : d) out.push_back(v * v);
  return out;
}

RationalVector poly_product(const RationalVector& a, const RationalVector& b) {
  RationalVector out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

KeyFacts key_facts_any_odd(int ell, int n) {
  if (n < 4) throw std::invalid_argument("degree-l key facts need n >= 4");
  if (ell < 1 || ell % 2 == 0) throw std::invalid_argument("degree-l key facts need odd ell");
  // d/dt C^{(n-2)/2}_ell = (n-2) C^{n/2}_{ell-1}.
  const RationalVector c = gegenbauer_coefficients(n, ell - 1);
  const RationalVector c2 = poly_product(c, c);
  Rational cross, fourth;
  for (std::size_t i = 0; i < c2.size(); ++i) {
    if (c2[i].is_zero()) continue;
    for (std::size_t j = 0; j < c2.size(); ++j) {
      if (c2[j].is_zero()) continue;
      const Rational coef = c2[i] * c2[j];
      cross += coef * monomial_moment(MultiIndex(n, {{0, static_cast<int>(i)}, {1, static_cast<int>(j)}}));
      fourth += coef * monomial_moment(MultiIndex(n, {{0, static_cast<int>(i + j)}}));
    }
  }
  const Rational a2 = harmonic_normalizer_squared(n, ell);
  const Rational scale = a2 * a2 * pow(Rational(n - 2), 4);
  KeyFacts k;
  k.ell = ell;
  k.n = n;
  k.fact1_exact = scale * cross;
  k.fact2_exact = scale * fourth;
  const double nn = static_cast<double>(n) * n;
  k.fact1_ratio = (k.fact1_exact / (Rational(ell) * Rational(ell) * Rational(n) * Rational(n))).to_double();
  k.fact2_ratio = k.fact2_exact.to_double() / nn;
  return k;
}

std::vector<std::vector<std::pair<int, Rational>>> sparse_frequencies(const TorusCombo& t) {
  std::vector<std::vector<std::pair<int, Rational>>> out;
  out.reserve(t.frequencies.size());
  for (const auto& f : t.frequencies) {
    auto& row = out.emplace_back();
    for (std::size_t i = 0; i < f.v.size(); ++i)
      if (!f.v[i].is_zero()) row.emplace_back(static_cast<int>(i), f.v[i]);
  }
  return out;
}

Rational sparse_dot(const std::vector<std::pair<int, long>>& bv, const std::vector<std::pair<int, Rational>>& w) {
  Rational acc;
  auto i = bv.begin();
  auto j = w.begin();
  while (i != bv.end() && j != w.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      acc += Rational(i->second) * j->second;
      ++i;
      ++j;
    }
  }
  return acc;
}

}  // namespace

const BoundComponent& BoundReport::component(const std::string& label) const {
  for (const auto& c : components)
    if (c.label == label) return c;
  throw std::out_of_range("bound report has no component \"" + label + "\"");
}

Json BoundReport::to_json() const {
  Json comps = Json::array();
  for (const auto& c : components) {
    Json j{{"label", c.label}, {"value", c.value}};
    if (c.radicand) {
      j["radicand"] = rational_to_json(*c.radicand);
      j["multiplier"] = c.multiplier;
    }
    comps.push_back(std::move(j));
  }
  Json j{{"family", family}, {"bound", bound},        {"method", method},
         {"n", n},           {"mu", mu},              {"bound_value", bound_value},
         {"vacuous", vacuous()}, {"components", comps}};
  if (method == "monte-carlo") {
    j["standard_error"] = standard_error;
    j["samples"] = samples;
  }
  if (seed) j["seed"] = *seed;
  return j;
}

std::string BoundReport::csv_header() {
  return "family,bound,method,n,mu,bound_value,standard_error,samples,vacuous,components";
}

std::string BoundReport::csv_row() const {
  std::ostringstream os;
  os << family << ',' << bound << ',' << method << ',' << n << ',' << format_double(mu) << ','
     << format_double(bound_value) << ',' << format_double(standard_error) << ',' << samples << ','
     << (vacuous() ? "true" : "false") << ',';
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) os << ';';
    os << components[i].label << '=' << format_double(components[i].value);
  }
  return os.str();
}

double spread_constant() { return 2.0 * (1.0 + std::sqrt(std::numbers::pi) / (2.0 * std::numbers::sqrt2)); }

BoundReport generic_bound_mc(const EigenfunctionSpec& spec, double mu, std::uint64_t samples,
                             const SeededStream& stream, unsigned workers) {
  if (!(mu > 0.0)) throw std::invalid_argument("generic_bound_mc: mu must be positive");
  if (samples < 1000) throw std::invalid_argument("generic_bound_mc: need at least 1000 samples");
  const Geometry geo = geometry_of(spec);
  const auto comps = spectral_components(spec);
  double exact_mean = 0.0, spread = 0.0;
  for (const auto& c : comps) {
    exact_mean += c.weight * c.mu;
    spread += c.weight * (c.mu - mu) * (c.mu - mu);
  }

  const std::size_t blocks = block_count(samples);
  std::vector<double> sum(blocks, 0.0), sum_sq(blocks, 0.0);
  const std::size_t dim = static_cast<std::size_t>(geo.ambient_dimension());
  for_each_block(samples, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SeededStream s = stream.substream(b);
    std::vector<double> x(dim);
    double acc = 0.0, acc_sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      geo.sample_point(s, x);
      const double dev = std::abs(gradient_norm_squared_unchecked(spec, x) - exact_mean);
      acc += dev;
      acc_sq += dev * dev;
    }
    sum[b] = acc;
    sum_sq[b] = acc_sq;
  });
  double total = 0.0, total_sq = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    total += sum[b];
    total_sq += sum_sq[b];
  }
  const double nn = static_cast<double>(samples);
  const double mad = total / nn;
  const double var = std::max(0.0, (total_sq / nn - mad * mad) * nn / (nn - 1.0));

  BoundReport r;
  r.family = family_name(spec);
  r.bound = "generic";
  r.method = "monte-carlo";
  r.n = geo.ambient_dimension();
  r.mu = mu;
  r.samples = samples;
  r.seed = stream.seed();
  const double first = 2.0 / mu * mad;
  const double second = spread_constant() / mu * std::sqrt(spread);
  r.components.push_back({"mean_abs_deviation", mad, std::nullopt, 1.0});
  r.components.push_back({"first", first, std::nullopt, 1.0});
  r.components.push_back({"second", second, std::nullopt, 1.0});
  r.bound_value = first + second;
  r.standard_error = 2.0 / mu * std::sqrt(var / nn);
  return r;
}

Rational quadratic_ratio(const RationalVector& d) {
  check_spectrum(d);
  Rational s2, s4;
  for (const Rational& v : d) {
    const Rational v2 = v * v;
    s2 += v2;
    s4 += v2 * v2;
  }
  return s4 / (s2 * s2);
}

BoundReport quadratic_bound(const RationalVector& d) {
  const Rational r = quadratic_ratio(d);
  const Rational n(static_cast<long>(d.size()));
  BoundReport rep;
  rep.family = "quadratic";
  rep.bound = "quadratic";
  rep.method = "exact";
  rep.n = static_cast<int>(d.size());
  rep.mu = 2.0 * rep.n;
  rep.components.push_back(rooted("theorem", Rational(6) * r));
  rep.components.push_back(rooted("intermediate", (Rational(2) + Rational(4) / n) * r + Rational(2) / n));
  rep.components.push_back(rooted("sharpened", (Rational(4) + Rational(4) / n) * r));
  rep.components.push_back({"ratio_R", r.to_double(), std::nullopt, 1.0});
  rep.bound_value = rep.components.front().value;
  return rep;
}

QuadraticGradientMoments quadratic_gradient_moments(const RationalVector& d) {
  check_spectrum(d);
  const int n = static_cast<int>(d.size());
  const RationalVector p = squares(d);  // P = sum d_i^2 y_i
  const RationalVector& q = d;          // Q = sum d_i y_i, y = x^2
  Rational norm2;
  for (const Rational& v : p) norm2 += v;
  const Rational c2 = Rational(n) * Rational(n + 2) / (Rational(2) * norm2);

  const auto moment = [n](std::initializer_list<const RationalVector*> forms) {
    std::vector<RationalVector> list;
    for (const auto* f : forms) list.push_back(*f);
    return diagonal_form_moment(n, list);
  };
  // |grad_S f|^2 = 4 C^2 (P - Q^2).
  const Rational e_p = moment({&p});
  const Rational e_q2 = moment({&q, &q});
  const Rational e_p2 = moment({&p, &p});
  const Rational e_pq2 = moment({&p, &q, &q});
  const Rational e_q4 = moment({&q, &q, &q, &q});
  QuadraticGradientMoments m;
  m.mean = Rational(4) * c2 * (e_p - e_q2);
  m.second_moment = Rational(16) * c2 * c2 * (e_p2 - Rational(2) * e_pq2 + e_q4);
  m.variance = m.second_moment - m.mean * m.mean;
  return m;
}

Rational quadratic_variance_exact(const RationalVector& d) { return quadratic_gradient_moments(d).variance; }

Rational quadratic_variance_displayed_bound(const RationalVector& d) {
  const Rational r = quadratic_ratio(d);
  const Rational n(static_cast<long>(d.size()));
  return Rational(8) * n * n * r + Rational(8) * n * (Rational(1) + Rational(2) * r);
}

KeyFacts degree_l_key_facts(int ell, int n) {
  if (ell < 3) throw std::invalid_argument("degree_l_key_facts: ell must be odd and at least 3");
  return key_facts_any_odd(ell, n);
}

BoundReport degree_l_bound(int ell, int n, const std::vector<double>& a) {
  if (a.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("degree_l_bound: need one coefficient per coordinate");
  double s2 = 0.0, s4 = 0.0;
  for (double v : a) {
    s2 += v * v;
    s4 += v * v * v * v;
  }
  if (std::abs(s2 - 1.0) > 1e-10) throw std::invalid_argument("degree_l_bound: need sum a_i^2 = 1");
  const KeyFacts k = key_facts_any_odd(ell, n);
  const double mu = static_cast<double>(ell) * (n + ell - 2);
  const double f1 = k.fact1_exact.to_double();
  const double f2 = k.fact2_exact.to_double();
  const double fourth = f1 + (f2 - f1) * s4;
  BoundReport r;
  r.family = "gegenbauer";
  r.bound = "degree_l";
  r.method = "exact";
  r.n = n;
  r.mu = mu;
  r.components.push_back({"a_l4_squared", std::sqrt(s4), std::nullopt, 1.0});
  r.components.push_back({"ambient_fourth_moment", fourth, std::nullopt, 1.0});
  r.components.push_back({"fact1", f1, std::nullopt, 1.0});
  r.components.push_back({"fact2", f2, std::nullopt, 1.0});
  r.bound_value = std::sqrt(std::max(0.0, fourth - mu * mu)) / mu;
  return r;
}

Rational torus_gram_sum(const TorusCombo& t) {
  const auto sparse = sparse_frequencies(t);
  Rational diag, off;
  for (std::size_t i = 0; i < t.frequencies.size(); ++i) {
    const auto& bv = t.frequencies[i].bv_sparse;
    diag += t.frequencies[i].norm_squared * t.frequencies[i].norm_squared;
    for (std::size_t j = i + 1; j < t.frequencies.size(); ++j) {
      const Rational g = sparse_dot(bv, sparse[j]);
      if (!g.is_zero()) off += g * g;
    }
  }
  return diag + Rational(2) * off;
}

Rational torus_inner_quantity(const TorusCombo& t) {
  const Rational m(static_cast<long>(t.frequencies.size()));
  return torus_gram_sum(t) / (m * (m + Rational(2)));
}

Rational torus_default_mu_scaled(const TorusCombo& t) {
  Rational s;
  for (const auto& f : t.frequencies) s += f.norm_squared;
  return s / Rational(static_cast<long>(t.frequencies.size()));
}

Rational torus_spread_radicand(const TorusCombo& t, const Rational& mu_scaled) {
  Rational s;
  for (const auto& f : t.frequencies) {
    const Rational dev = f.norm_squared - mu_scaled;
    s += dev * dev;
  }
  return s / Rational(static_cast<long>(t.frequencies.size()));
}

BoundReport torus_bound(const TorusCombo& t, std::optional<Rational> mu_scaled) {
  if (t.frequencies.empty()) throw std::invalid_argument("torus_bound: empty frequency set");
  const Rational m = mu_scaled ? *mu_scaled : torus_default_mu_scaled(t);
  if (m.sign() <= 0) throw std::invalid_argument("torus_bound: mu must be positive");
  const Rational inv_m2 = Rational(1) / (m * m);
  const double const2 = 2.0 * std::numbers::sqrt2 + std::sqrt(std::numbers::pi);
  BoundReport r;
  r.family = "torus";
  r.bound = "torus";
  r.method = "exact";
  r.n = t.n();
  r.mu = 4.0 * std::numbers::pi * std::numbers::pi * m.to_double();
  r.components.push_back(rooted("first", Rational(8) * torus_inner_quantity(t) * inv_m2));
  r.components.push_back(rooted("second", torus_spread_radicand(t, m) * inv_m2, const2));
  r.components.push_back({"mu_over_4pi2", m.to_double(), std::nullopt, 1.0});
  r.bound_value = r.components[0].value + r.components[1].value;
  return r;
}

std::vector<RationalVector> pair_frequencies(int n) {
  if (n < 2) throw std::invalid_argument("pair_frequencies: n must be at least 2");
  std::vector<RationalVector> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      RationalVector v(static_cast<std::size_t>(n));
      v[static_cast<std::size_t>(i)] = 1;
      v[static_cast<std::size_t>(j)] = 1;
      out.push_back(std::move(v));
    }
  return out;
}

std::vector<RationalVector> scaled_pair_frequencies(const RationalVector& deltas) {
  auto out = pair_frequencies(static_cast<int>(deltas.size()));
  for (auto& v : out)
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!v[i].is_zero()) v[i] /= Rational(1) + deltas[i];
  return out;
}

RationalMatrix diagonal_metric(const RationalVector& deltas) {
  const std::size_t n = deltas.size();
  RationalMatrix b(n, RationalVector(n));
  for (std::size_t i = 0; i < n; ++i) b[i][i] = Rational(1) + deltas[i];
  return b;
}

Rational perturbation_epsilon(const RationalVector& deltas) {
  Rational eps;
  for (const Rational& d : deltas) {
    const Rational e = abs(Rational(1) - Rational(1) / (Rational(1) + d));
    if (e > eps) eps = e;
  }
  return eps;
}

Rational pair_family_inner_upper(int n) {
  return Rational(16L * n - 12) / Rational(static_cast<long>(n) * n - n + 4);
}

}  // namespace steinlab
