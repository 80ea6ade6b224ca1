#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the row-reduction code of the library.

#include <map>
#include <vector>

#include "perturba/graded.hpp"

namespace oracle {

using perturba::Matrix;
using perturba::Rational;

template <class T> Matrix<T> naive_product(const Matrix<T> &a, const Matrix<T> &b) {
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T s(0);
      for (std::size_t k = 0; k < a.cols(); ++k) s = s + a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

/// Rank by fraction-free (Bareiss-style) column elimination over Q.
inline std::size_t rank_q(Matrix<Rational> a) {
  std::size_t r = 0;
  const std::size_t m = a.rows(), n = a.cols();
  for (std::size_t row = 0; row < m && r < n; ++row) {
    std::size_t piv = n;
    for (std::size_t c = r; c < n; ++c)
      if (!a(row, c).is_zero()) { piv = c; break; }
    if (piv == n) continue;
    for (std::size_t i = 0; i < m; ++i) std::swap(a(i, r), a(i, piv));
    for (std::size_t c = r + 1; c < n; ++c) {
      if (a(row, c).is_zero()) continue;
      const Rational f = a(row, c) / a(row, r);
      for (std::size_t i = 0; i < m; ++i) a(i, c) = a(i, c) - f * a(i, r);
    }
    ++r;
  }
  return r;
}

/// Determinant by cofactor expansion (n <= 6 keeps this cheap enough).
inline Rational det_q(const Matrix<Rational> &a) {
  const std::size_t n = a.rows();
  if (n == 0) return Rational(1);
  if (n == 1) return a(0, 0);
  Rational s(0);
  for (std::size_t j = 0; j < n; ++j) {
    if (a(0, j).is_zero()) continue;
    Matrix<Rational> minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    const Rational term = a(0, j) * det_q(minor);
    s = (j % 2 == 0) ? s + term : s - term;
  }
  return s;
}

} // namespace oracle
