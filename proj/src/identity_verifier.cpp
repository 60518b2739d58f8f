#include "steinlab/identity_verifier.hpp"

#include <stdexcept>
#include <string>

#include "steinlab/exact_arith.hpp"

namespace steinlab {

namespace {

void require_odd(int ell, const char* who) {
  if (ell < 1 || ell % 2 == 0) throw std::invalid_argument(std::string(who) + ": ell must be odd and positive");
}

IdentityResult make_result(std::string id, Json params, Rational computed, Rational expected) {
  IdentityResult r;
  r.id = std::move(id);
  r.parameters = std::move(params);
  r.pass = computed == expected;
  r.computed = std::move(computed);
  r.expected = std::move(expected);
  return r;
}

Rational power_of_two(long e) {
  return e >= 0 ? pow(Rational(2), static_cast<unsigned>(e)) : Rational(1) / pow(Rational(2), static_cast<unsigned>(-e));
}

// sum_{k,m} (-1)^{k+m} g(l-k-m-1/2) / (4^{k+m} k! m! (l-1-2k)! (l-1-2m)!), where
// g(t) = Gamma(t) / sqrt(pi) is supplied by the caller.
template <class G>
Rational claim_double_sum(int ell, G gamma_over_sqrt_pi) {
  const int top = (ell - 1) / 2;
  Rational s;
  for (int k = 0; k <= top; ++k)
    for (int m = 0; m <= top; ++m) {
      Rational term = gamma_over_sqrt_pi(ell - k - m);
      term /= pow(Rational(4), static_cast<unsigned>(k + m));
      term /= Rational(factorial(k) * factorial(m));
      term /= Rational(factorial(ell - 1 - 2 * k) * factorial(ell - 1 - 2 * m));
      if ((k + m) % 2 == 1) term = -term;
      s += term;
    }
  return s;
}

}  // namespace

Json IdentityResult::to_json() const {
  return Json{{"id", id},
              {"parameters", parameters},
              {"computed", rational_to_json(computed)},
              {"expected", rational_to_json(expected)},
              {"pass", pass}};
}

IdentityResult appendix_sum(int ell) {
  require_odd(ell, "appendix_sum");
  // Gamma(j - 1/2) / sqrt(pi) = (2j-3)!! / 2^{j-1}, j = l - k - m >= 1.
  const Rational inner = claim_double_sum(
      ell, [](int j) { return Rational(double_factorial(2L * j - 3)) / power_of_two(j - 1); });
  const Rational value = power_of_two(ell - 1) * inner * Rational(factorial(ell - 1));
  return make_result("appendix_sum", Json{{"ell", ell}}, value, Rational(1));
}

IdentityResult claim_check(int ell) {
  require_odd(ell, "claim_check");
  const Rational inner = claim_double_sum(ell, [](int j) {
    const HalfGamma g = gamma_half(2L * j - 1);
    if (g.sqrt_pi_power != 1) throw std::logic_error("claim_check: expected a half-integer Gamma value");
    return g.coeff;
  });
  const Rational value = power_of_two(ell - 1) * inner;
  return make_result("claim_check", Json{{"ell", ell}}, value, Rational(1) / Rational(factorial(ell - 1)));
}

IdentityResult hypergeom_inner_sum(int p, int k) {
  if (p < 0 || k < 0 || k > p) throw std::invalid_argument("hypergeom_inner_sum: need 0 <= k <= p");
  Rational s;
  for (int m = 0; m <= p; ++m) {
    Rational term(factorial(4L * p - 2L * k - 2L * m));
    term /= Rational(factorial(m) * factorial(2L * p - 2L * m) * factorial(2L * p - k - m));
    if (m % 2 == 1) term = -term;
    s += term;
  }
  const Rational expected = k == 0 ? power_of_two(2L * p) : Rational(0);
  return make_result("hypergeom_inner_sum", Json{{"p", p}, {"k", k}}, s, expected);
}

Rational hypergeom_closed_form(int p, int k) {
  if (p < 0 || k < 0 || k > p) throw std::invalid_argument("hypergeom_closed_form: need 0 <= k <= p");
  Rational v(factorial(4L * p - 2L * k));
  v /= Rational(factorial(2L * p) * factorial(2L * p - k));
  v *= shifted_factorial(Rational(k - p), p);
  v *= pow(Rational(-2), static_cast<unsigned>(p));
  v /= Rational(double_factorial(4L * p - 2L * k - 1)) / Rational(double_factorial(2L * p - 2L * k - 1));
  return v;
}

IdentityResult chu_vandermonde(int n, const Rational& b, const Rational& c) {
  if (n < 0) throw std::invalid_argument("chu_vandermonde: n must be nonnegative");
  require_half_integer(b);
  require_half_integer(c);
  const Rational cn = shifted_factorial(c, n);
  if (cn.is_zero()) throw std::invalid_argument("chu_vandermonde: c must avoid {0, -1, ..., -(n-1)}");
  Rational lhs;
  for (int k = 0; k <= n; ++k) {
    Rational term = shifted_factorial(Rational(-n), k) * shifted_factorial(-b, k);
    term /= shifted_factorial(c, k) * Rational(factorial(k));
    lhs += term;
  }
  const Rational rhs = shifted_factorial(c + b, n) / cn;
  return make_result("chu_vandermonde", Json{{"n", n}, {"b", b.str()}, {"c", c.str()}}, lhs, rhs);
}

std::vector<IdentityResult> all_identities(int max_ell, int max_p) {
  std::vector<IdentityResult> out;
  for (int ell = 1; ell <= max_ell; ell += 2) out.push_back(appendix_sum(ell));
  for (int ell = 1; ell <= max_ell; ell += 2) out.push_back(claim_check(ell));
  for (int p = 0; p <= max_p; ++p)
    for (int k = 0; k <= p; ++k) {
      IdentityResult direct = hypergeom_inner_sum(p, k);
      const Rational closed = hypergeom_closed_form(p, k);
      out.push_back(make_result("hypergeom_closed_form", direct.parameters, closed, direct.expected));
      out.push_back(std::move(direct));
    }
  const Rational bs[] = {Rational(1, 2), Rational(1), Rational(3, 2), Rational(-5, 2)};
  const Rational cs[] = {Rational(5, 2), Rational(3), Rational(1, 2), Rational(-7, 2)};
  for (int n = 0; n <= 6; ++n)
    for (const Rational& b : bs)
      for (const Rational& c : cs) {
        if (shifted_factorial(c, n).is_zero()) continue;
        out.push_back(chu_vandermonde(n, b, c));
      }
  return out;
}

}  // namespace steinlab
