#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "perturba/errors.hpp"

namespace perturba {

/// Exact rational number backed by GMP. Always kept in canonical form.
class Rational {
public:
  Rational() = default;
  Rational(long v) : q_(v) {}                 // NOLINT(google-explicit-constructor)
  Rational(int v) : q_(static_cast<long>(v)) {} // NOLINT(google-explicit-constructor)
  Rational(long num, long den) {
    if (den == 0) throw SchemaError("zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
  }
  explicit Rational(const mpq_class &q) : q_(q) { q_.canonicalize(); }

  /// Parses "p", "p/q", or a finite decimal such as "-1.25".
  static Rational parse(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw SchemaError("empty rational literal");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      std::size_t frac = s.size() - dot - 1;
      mpz_class num;
      if (num.set_str(digits, 10) != 0)
        throw SchemaError("malformed rational literal '" + s + "'");
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
      return Rational(mpq_class(num, den));
    }
    mpq_class q;
    if (q.set_str(s, 10) != 0)
      throw SchemaError("malformed rational literal '" + s + "'");
    if (q.get_den() == 0) throw SchemaError("zero denominator in '" + s + "'");
    return Rational(q);
  }

  const mpq_class &raw() const noexcept { return q_; }
  double to_double() const { return q_.get_d(); }
  std::string str() const { return q_.get_str(); }
  bool is_zero() const { return sgn(q_) == 0; }
  int sign() const { return sgn(q_); }

  Rational operator-() const { return Rational(mpq_class(-q_)); }
  Rational &operator+=(const Rational &o) { q_ += o.q_; return *this; }
  Rational &operator-=(const Rational &o) { q_ -= o.q_; return *this; }
  Rational &operator*=(const Rational &o) { q_ *= o.q_; return *this; }
  Rational &operator/=(const Rational &o) {
    if (o.is_zero()) throw Singular("division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational &b) { return a += b; }
  friend Rational operator-(Rational a, const Rational &b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational &b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational &b) { return a /= b; }
  friend bool operator==(const Rational &a, const Rational &b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Rational &a, const Rational &b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  friend std::ostream &operator<<(std::ostream &os, const Rational &r) { return os << r.str(); }

private:
  mpq_class q_;
};

inline Rational abs(const Rational &r) { return r.sign() < 0 ? -r : r; }

} // namespace perturba
