#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>

#include "chipfire/errors.hpp"

namespace chipfire {

/// Arbitrary-precision signed integer.
using Int = mpz_class;

/// Exact rational number, always stored normalized:
/// gcd(num, den) = 1 and den >= 1.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // implicit by design: 0, 1, ... literals
  Rational(const Int& n) : v_(n) {}
  Rational(const Int& num, const Int& den);
  Rational(long num, long den);

  /// Parses "p/q" or "p"; p may carry a leading minus sign, q must be a
  /// positive integer. No whitespace. Throws ParseError.
  static Rational parse(std::string_view text);

  Int num() const { return v_.get_num(); }
  Int den() const { return v_.get_den(); }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }

  /// Largest integer <= value (floor(-1/6) = -1).
  Int floor_int() const;
  /// Smallest integer >= value.
  Int ceil_int() const;

  /// True when *this != 0 and other / *this is an integer
  /// (and true for divides(0) even when *this == 0).
  bool divides(const Rational& other) const;

  double to_double() const { return v_.get_d(); }

  /// Minimal form: "p" when den == 1, otherwise "p/q".
  std::string str() const;
  /// Always "p/q", including den == 1.
  std::string str_frac() const;

  Rational& operator+=(const Rational& o) {
    v_ += o.v_;
    return *this;
  }
  Rational& operator-=(const Rational& o) {
    v_ -= o.v_;
    return *this;
  }
  Rational& operator*=(const Rational& o) {
    v_ *= o.v_;
    return *this;
  }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(mpq_class(a.v_ + b.v_));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(mpq_class(a.v_ - b.v_));
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(mpq_class(a.v_ * b.v_));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    Rational r(a);
    r /= b;
    return r;
  }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }
  friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) <= 0; }
  friend bool operator>(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) > 0; }
  friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r);

  friend Rational abs(const Rational& a) { return Rational(mpq_class(::abs(a.v_))); }
  friend Rational gcd(const Rational& a, const Rational& b);

 private:
  explicit Rational(mpq_class v) : v_(std::move(v)) {}
  mpq_class v_;
};

Rational abs(const Rational& a);

/// Positive generator of the subgroup a*Z + b*Z of the rationals;
/// equivalently the smallest positive value of n1*a + n2*b over integers n.
/// gcd(0, b) = |b| and gcd(0, 0) = 0.
Rational gcd(const Rational& a, const Rational& b);

/// Exact power with integer exponent >= 0.
Rational pow(const Rational& base, unsigned long e);

/// Used in a few formatting helpers: 2^-e as an exact rational.
Rational dyadic(unsigned long e);

}  // namespace chipfire

namespace Eigen {

template <>
struct NumTraits<chipfire::Rational> : GenericNumTraits<chipfire::Rational> {
  typedef chipfire::Rational Real;
  typedef chipfire::Rational NonInteger;
  typedef chipfire::Rational Nested;
  typedef chipfire::Rational Literal;
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};

template <>
struct NumTraits<chipfire::Int> : GenericNumTraits<chipfire::Int> {
  typedef chipfire::Int Real;
  typedef chipfire::Int NonInteger;
  typedef chipfire::Int Nested;
  typedef chipfire::Int Literal;
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
  enum {
    IsComplex = 0,
    IsInteger = 1,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 100,
    MulCost = 100
  };
};

}  // namespace Eigen
