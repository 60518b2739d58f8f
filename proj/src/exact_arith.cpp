#include "steinlab/exact_arith.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace steinlab {

BigInt factorial(long n) {
  if (n < 0) throw std::domain_error("factorial: negative argument " + std::to_string(n));
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

BigInt double_factorial(long n) {
  if (n < -1) throw std::domain_error("double_factorial: argument below -1: " + std::to_string(n));
  if (n <= 0) return 1;
  BigInt out;
  mpz_2fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

double HalfGamma::to_double() const {
  double v = coeff.to_double();
  if (sqrt_pi_power == 1) v *= std::sqrt(std::numbers::pi);
  return v;
}

HalfGamma gamma_half(long two_t) {
  if (two_t <= 0)
    throw std::domain_error("gamma_half: argument " + std::to_string(two_t) + "/2 must be positive");
  if (two_t % 2 == 0) return {Rational(factorial(two_t / 2 - 1)), 0};
  // Gamma(m + 1/2) = (2m-1)!! / 2^m * sqrt(pi), with two_t = 2m + 1.
  const long m = (two_t - 1) / 2;
  BigInt pow2;
  mpz_ui_pow_ui(pow2.get_mpz_t(), 2, static_cast<unsigned long>(m));
  return {Rational(double_factorial(two_t - 2), pow2), 1};
}

void require_half_integer(const Rational& x) {
  const BigInt den = x.denominator();
  if (den != 1 && den != 2)
    throw std::invalid_argument("expected an integer or half-integer, got " + x.str());
}

Rational half(long two_t) { return Rational(BigInt(two_t), BigInt(2)); }

Rational shifted_factorial(const Rational& a, long k) {
  if (k < 0) throw std::domain_error("shifted_factorial: negative length");
  require_half_integer(a);
  Rational out = 1;
  Rational factor = a;
  for (long i = 0; i < k; ++i) {
    if (factor.is_zero()) return 0;
    out *= factor;
    factor += 1;
  }
  return out;
}

}  // namespace steinlab
