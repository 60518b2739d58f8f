#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace steinlab {

using BigInt = mpz_class;

// Exact rational number, always held in lowest terms with a positive
// denominator. Every constructor and every arithmetic result is canonical, so
// operator== is plain canonical-form equality.
class Rational {
 public:
  Rational() = default;

  template <std::signed_integral T>
  Rational(T value) : value_(static_cast<long>(value)) {}  // NOLINT(implicit)

  template <std::unsigned_integral T>
  Rational(T value) : value_(static_cast<unsigned long>(value)) {}  // NOLINT

  Rational(const BigInt& value) : value_(value) {}  // NOLINT(implicit)

  // Throws std::domain_error on a zero denominator.
  Rational(const BigInt& num, const BigInt& den);

  // Parses "p", "-p" or "p/q" (decimal). Throws std::invalid_argument.
  static Rational parse(std::string_view text);

  // Exact binary value of a finite double.
  static Rational from_double(double value);

  BigInt numerator() const { return value_.get_num(); }
  BigInt denominator() const { return value_.get_den(); }
  const mpq_class& raw() const { return value_; }

  double to_double() const { return value_.get_d(); }
  int sign() const { return sgn(value_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return value_.get_den() == 1; }
  std::string str() const { return value_.get_str(); }

  Rational& operator+=(const Rational& rhs) {
    value_ += rhs.value_;
    return *this;
  }
  Rational& operator-=(const Rational& rhs) {
    value_ -= rhs.value_;
    return *this;
  }
  Rational& operator*=(const Rational& rhs) {
    value_ *= rhs.value_;
    return *this;
  }
  // Throws std::domain_error on division by zero.
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const {
    Rational out;
    out.value_ = -value_;
    return out;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class value_;
};

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

Rational abs(const Rational& x);
Rational pow(const Rational& base, unsigned exponent);
std::ostream& operator<<(std::ostream& os, const Rational& x);

}  // namespace steinlab
