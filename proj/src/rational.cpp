#include "steinlab/rational.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace steinlab {

Rational::Rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  value_ = mpq_class(num, den);
  value_.canonicalize();
}

Rational Rational::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (s.empty()) throw std::invalid_argument("Rational: empty string");
  const auto slash = s.find('/');
  BigInt num, den = 1;
  try {
    if (slash == std::string::npos) {
      if (num.set_str(s, 10) != 0) throw std::invalid_argument(s);
    } else {
      if (num.set_str(s.substr(0, slash), 10) != 0 ||
          den.set_str(s.substr(slash + 1), 10) != 0)
        throw std::invalid_argument(s);
    }
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("Rational: cannot parse '" + s + "'");
  }
  return Rational(num, den);
}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw std::domain_error("Rational: non-finite double");
  Rational out;
  out.value_ = mpq_class(value);
  return out;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.is_zero()) throw std::domain_error("Rational: division by zero");
  value_ /= rhs.value_;
  return *this;
}

Rational abs(const Rational& x) { return x.sign() < 0 ? -x : x; }

Rational pow(const Rational& base, unsigned exponent) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), exponent);
  return Rational(num, den);
}

std::ostream& operator<<(std::ostream& os, const Rational& x) { return os << x.str(); }

}  // namespace steinlab
