#include "chipfire/rational.hpp"

#include <cctype>
#include <ostream>

namespace chipfire {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational::Rational(const Int& num, const Int& den) {
  if (sgn(den) == 0) throw ValidationError("rational with zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational::Rational(long num, long den) : Rational(Int(num), Int(den)) {}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw ValidationError("division by zero");
  v_ /= o.v_;
  return *this;
}

Rational Rational::parse(std::string_view text) {
  std::string_view p = text;
  std::string_view q = "1";
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    p = text.substr(0, slash);
    q = text.substr(slash + 1);
  }
  bool negative = false;
  if (!p.empty() && p.front() == '-') {
    negative = true;
    p.remove_prefix(1);
  }
  if (!all_digits(p) || !all_digits(q)) {
    throw ParseError("malformed rational literal: '" + std::string(text) + "'");
  }
  Int pn(std::string(p), 10);
  Int qn(std::string(q), 10);
  if (sgn(qn) == 0) {
    throw ParseError("zero denominator in rational literal: '" + std::string(text) + "'");
  }
  if (negative) pn = -pn;
  return Rational(pn, qn);
}

Int Rational::floor_int() const {
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
  return r;
}

Int Rational::ceil_int() const {
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
  return r;
}

bool Rational::divides(const Rational& other) const {
  if (is_zero()) return other.is_zero();
  return (other / *this).is_integer();
}

std::string Rational::str() const {
  return v_.get_str();
}

std::string Rational::str_frac() const {
  return num().get_str() + "/" + den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.v_;
}

Rational gcd(const Rational& a, const Rational& b) {
  // gcd(p1/q1, p2/q2) = gcd(p1*q2, p2*q1) / (q1*q2); the zero cases fall out
  // of the same formula since gcd(0, n) = |n|.
  Int cross1 = a.num() * b.den();
  Int cross2 = b.num() * a.den();
  Int g;
  mpz_gcd(g.get_mpz_t(), cross1.get_mpz_t(), cross2.get_mpz_t());
  return Rational(g, a.den() * b.den());
}

Rational pow(const Rational& base, unsigned long e) {
  Int n, d;
  mpz_pow_ui(n.get_mpz_t(), base.num().get_mpz_t(), e);
  mpz_pow_ui(d.get_mpz_t(), base.den().get_mpz_t(), e);
  return Rational(n, d);
}

Rational dyadic(unsigned long e) {
  Int d;
  mpz_ui_pow_ui(d.get_mpz_t(), 2, e);
  return Rational(Int(1), d);
}

}  // namespace chipfire
