#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>

#include "perturba/rational.hpp"

namespace perturba {

/// Float64 comparison policy. Exact scalars ignore it.
struct Tolerance {
  double tau = 1e-9;
};

template <class T> struct ScalarTraits;

template <> struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char *name = "rational";
  static Rational from_double(double v) { return Rational(mpq_class(v)); }
  static double to_double(const Rational &v) { return v.to_double(); }
  static double magnitude(const Rational &v) { return std::fabs(v.to_double()); }
};

template <> struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char *name = "f64";
  static double from_double(double v) { return v; }
  static double to_double(double v) { return v; }
  static double magnitude(double v) { return std::fabs(v); }
};

template <class T>
concept Scalar = requires(T a, T b) {
  { a + b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
  { a / b } -> std::convertible_to<T>;
  { -a } -> std::convertible_to<T>;
  ScalarTraits<T>::exact;
};

template <Scalar T> constexpr bool is_exact_v = ScalarTraits<T>::exact;

/// |x - y| <= tau * (1 + max(|x|, |y|)); exact equality for exact scalars.
template <Scalar T> bool approx_equal(const T &x, const T &y, const Tolerance &tol = {}) {
  if constexpr (is_exact_v<T>) {
    return x == y;
  } else {
    double ax = std::fabs(x), ay = std::fabs(y);
    return std::fabs(x - y) <= tol.tau * (1.0 + std::max(ax, ay));
  }
}

template <Scalar T> bool is_zero(const T &x, const Tolerance &tol = {}) {
  return approx_equal(x, T(0), tol);
}

template <Scalar T> double to_double(const T &x) { return ScalarTraits<T>::to_double(x); }

template <Scalar To, Scalar From> To scalar_cast(const From &x) {
  if constexpr (std::same_as<To, From>) {
    return x;
  } else if constexpr (std::same_as<To, double>) {
    return ScalarTraits<From>::to_double(x);
  } else {
    return ScalarTraits<To>::from_double(ScalarTraits<From>::to_double(x));
  }
}

} // namespace perturba
