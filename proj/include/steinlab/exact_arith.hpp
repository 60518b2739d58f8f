#pragma once

#include "steinlab/rational.hpp"

namespace steinlab {

BigInt factorial(long n);

// n(n-2)(n-4)...(2 or 1). Both 0!! and (-1)!! are the empty product; any n
// below -1 throws std::domain_error.
BigInt double_factorial(long n);

// Exact Gamma at a positive half-integer or integer argument:
// value = coeff * sqrt(pi)^sqrt_pi_power.
struct HalfGamma {
  Rational coeff;
  int sqrt_pi_power = 0;

  double to_double() const;
  friend bool operator==(const HalfGamma&, const HalfGamma&) = default;
};

// Gamma(two_t / 2). Throws std::domain_error for two_t <= 0.
HalfGamma gamma_half(long two_t);

// Pochhammer symbol a(a+1)...(a+k-1); a must be an integer or half-integer.
Rational shifted_factorial(const Rational& a, long k);

// Throws std::invalid_argument unless x has denominator 1 or 2.
void require_half_integer(const Rational& x);

// two_t / 2 as a Rational.
Rational half(long two_t);

}  // namespace steinlab
