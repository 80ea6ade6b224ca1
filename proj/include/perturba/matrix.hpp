#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "perturba/errors.hpp"
#include "perturba/scalar.hpp"

namespace perturba {

template <Scalar T> using Vector = std::vector<T>;

/// Dense row-major matrix. Zero-sized dimensions are legal and common: a map
/// into or out of a zero-dimensional degree is a 0xN or Nx0 matrix.
template <Scalar T> class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw ShapeMismatch("matrix data size");
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto &r : rows) {
      if (r.size() != cols_) throw ShapeMismatch("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<T> &data() const noexcept { return data_; }

  Vector<T> column(std::size_t c) const {
    Vector<T> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
  }
  void set_column(std::size_t c, const Vector<T> &v) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Copy of the sub-block starting at (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
  }
  void set_block(std::size_t r0, std::size_t c0, const Matrix &b) {
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
  }

  Matrix &operator+=(const Matrix &o) {
    require_same_shape(o, "+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix &operator-=(const Matrix &o) {
    require_same_shape(o, "-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix &operator*=(const T &s) {
    for (auto &x : data_) x *= s;
    return *this;
  }
  Matrix operator-() const {
    Matrix m(*this);
    for (auto &x : m.data_) x = -x;
    return m;
  }

  friend Matrix operator+(Matrix a, const Matrix &b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix &b) { return a -= b; }
  friend Matrix operator*(const T &s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix &a, const Matrix &b) {
    if (a.cols_ != b.rows_)
      throw ShapeMismatch("product of " + a.shape_str() + " and " + b.shape_str());
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T &aik = a(i, k);
        if (aik == T(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }
  friend Vector<T> operator*(const Matrix &a, const Vector<T> &v) {
    if (a.cols_ != v.size()) throw ShapeMismatch("matrix-vector product " + a.shape_str());
    Vector<T> out(a.rows_, T(0));
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) out[i] += a(i, k) * v[k];
    return out;
  }
  friend bool operator==(const Matrix &a, const Matrix &b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  bool is_zero(const Tolerance &tol = {}) const {
    return std::all_of(data_.begin(), data_.end(), [&](const T &x) { return perturba::is_zero(x, tol); });
  }
  /// Largest entry magnitude, as a double.
  double max_abs() const {
    double m = 0.0;
    for (const auto &x : data_) m = std::max(m, ScalarTraits<T>::magnitude(x));
    return m;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  template <Scalar U> Matrix<U> cast() const {
    std::vector<U> d;
    d.reserve(data_.size());
    for (const auto &x : data_) d.push_back(scalar_cast<U>(x));
    return Matrix<U>(rows_, cols_, std::move(d));
  }

private:
  void require_same_shape(const Matrix &o, const char *op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw ShapeMismatch(std::string("operator") + op + " on " + shape_str() + " and " + o.shape_str());
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <Scalar T> bool approx_equal(const Matrix<T> &a, const Matrix<T> &b, const Tolerance &tol = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    if (!approx_equal(a.data()[i], b.data()[i], tol)) return false;
  return true;
}

/// Maximum row-sum norm (operator norm for the sup norm).
template <Scalar T> double sup_operator_norm(const Matrix<T> &a) {
  double best = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) s += ScalarTraits<T>::magnitude(a(r, c));
    best = std::max(best, s);
  }
  return best;
}

template <Scalar T> bool is_zero_vector(const Vector<T> &v, const Tolerance &tol = {}) {
  for (const auto &x : v)
    if (!is_zero(x, tol)) return false;
  return true;
}

inline double sup_norm(const std::vector<double> &v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

inline double euclidean_norm(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

template <Scalar T> Vector<T> operator+(Vector<T> a, const Vector<T> &b) {
  if (a.size() != b.size()) throw ShapeMismatch("vector sum: length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

template <Scalar T> Vector<T> operator-(Vector<T> a, const Vector<T> &b) {
  if (a.size() != b.size()) throw ShapeMismatch("vector difference: length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

template <Scalar T> Matrix<T> kron(const Matrix<T> &a, const Matrix<T> &b) {
  Matrix<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) == T(0)) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) out(i * b.rows() + r, j * b.cols() + c) = a(i, j) * b(r, c);
    }
  return out;
}

template <Scalar T> Matrix<T> hstack(const Matrix<T> &a, const Matrix<T> &b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("hstack row count");
  Matrix<T> m(a.rows(), a.cols() + b.cols());
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  return m;
}

template <Scalar T> Matrix<T> vstack(const Matrix<T> &a, const Matrix<T> &b) {
  if (a.cols() != b.cols()) throw ShapeMismatch("vstack column count");
  Matrix<T> m(a.rows() + b.rows(), a.cols());
  m.set_block(0, 0, a);
  m.set_block(a.rows(), 0, b);
  return m;
}

// ---------------------------------------------------------------------------
// Row reduction and everything derived from it.

template <Scalar T> struct RowEchelon {
  Matrix<T> reduced;               ///< reduced row echelon form
  std::vector<std::size_t> pivots; ///< pivot column of each nonzero row
  std::size_t rank() const { return pivots.size(); }
};

/// Gauss-Jordan elimination. Exact scalars pivot on the first nonzero entry.
/// Float64 uses partial pivoting; a column whose best pivot magnitude is below
/// tau/10 is treated as zero, and one inside [tau/10, 10 tau] raises
/// NumericRankAmbiguity.
template <Scalar T> RowEchelon<T> row_reduce(Matrix<T> a, const Tolerance &tol = {}) {
  RowEchelon<T> out;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t best = a.rows();
    if constexpr (is_exact_v<T>) {
      for (std::size_t r = row; r < a.rows(); ++r)
        if (!(a(r, col) == T(0))) { best = r; break; }
    } else {
      double mag = 0.0;
      for (std::size_t r = row; r < a.rows(); ++r)
        if (std::fabs(a(r, col)) > mag) { mag = std::fabs(a(r, col)); best = r; }
      if (mag < tol.tau / 10) {
        for (std::size_t r = row; r < a.rows(); ++r) a(r, col) = 0.0;
        best = a.rows();
      } else if (mag <= 10 * tol.tau) {
        std::ostringstream msg;
        msg << "pivot magnitude " << mag << " in column " << col << " within [tau/10, 10 tau]";
        throw NumericRankAmbiguity(msg.str());
      }
    }
    if (best == a.rows()) continue;
    if (best != row)
      for (std::size_t c = 0; c < a.cols(); ++c) std::swap(a(row, c), a(best, c));
    T inv = T(1) / a(row, col);
    for (std::size_t c = col; c < a.cols(); ++c) a(row, c) *= inv;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      if (r == row || a(r, col) == T(0)) continue;
      T f = a(r, col);
      for (std::size_t c = col; c < a.cols(); ++c) a(r, c) -= f * a(row, c);
      if constexpr (!is_exact_v<T>) a(r, col) = 0.0;
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.reduced = std::move(a);
  return out;
}

template <Scalar T> std::size_t rank(const Matrix<T> &a, const Tolerance &tol = {}) {
  return row_reduce(a, tol).rank();
}

/// Columns form a basis of ker(a).
template <Scalar T> Matrix<T> kernel_basis(const Matrix<T> &a, const Tolerance &tol = {}) {
  auto re = row_reduce(a, tol);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : re.pivots) is_pivot[p] = true;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < a.cols(); ++c)
    if (!is_pivot[c]) free.push_back(c);
  Matrix<T> k(a.cols(), free.size());
  for (std::size_t j = 0; j < free.size(); ++j) {
    k(free[j], j) = T(1);
    for (std::size_t i = 0; i < re.pivots.size(); ++i) k(re.pivots[i], j) = -re.reduced(i, free[j]);
  }
  return k;
}

/// Some x with a x = b, or nullopt when b is not in the image.
template <Scalar T>
std::optional<Vector<T>> solve(const Matrix<T> &a, const Vector<T> &b, const Tolerance &tol = {}) {
  if (b.size() != a.rows()) throw ShapeMismatch("solve: right-hand side length");
  Matrix<T> aug(a.rows(), a.cols() + 1);
  aug.set_block(0, 0, a);
  for (std::size_t r = 0; r < a.rows(); ++r) aug(r, a.cols()) = b[r];
  auto re = row_reduce(aug, tol);
  if (!re.pivots.empty() && re.pivots.back() == a.cols()) return std::nullopt;
  Vector<T> x(a.cols(), T(0));
  for (std::size_t i = 0; i < re.pivots.size(); ++i) x[re.pivots[i]] = re.reduced(i, a.cols());
  return x;
}

template <Scalar T> std::optional<Matrix<T>> inverse(const Matrix<T> &a, const Tolerance &tol = {}) {
  if (!a.square()) throw ShapeMismatch("inverse of non-square " + a.shape_str());
  const std::size_t n = a.rows();
  auto re = row_reduce(hstack(a, Matrix<T>::identity(n)), tol);
  if (re.rank() < n || (n > 0 && re.pivots[n - 1] != n - 1)) return std::nullopt;
  return re.reduced.block(0, n, n, n);
}

/// Reflexive generalized inverse: g with a g a = a and g a g = g. On im(a) it
/// is a right inverse of a; composed with a projection onto im(a) along a
/// coordinate complement it is defined everywhere.
template <Scalar T> Matrix<T> generalized_inverse(const Matrix<T> &a, const Tolerance &tol = {}) {
  const std::size_t m = a.rows(), n = a.cols();
  auto cols = row_reduce(a, tol).pivots;
  // Extend the pivot columns of a by standard basis vectors to a basis of the target.
  Matrix<T> basis_a(m, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) basis_a.set_column(j, a.column(cols[j]));
  auto ext = row_reduce(hstack(basis_a, Matrix<T>::identity(m)), tol);
  Matrix<T> basis(m, m);
  std::size_t next = 0;
  for (auto p : ext.pivots) {
    if (p < cols.size()) basis.set_column(next++, basis_a.column(p));
    else {
      Vector<T> e(m, T(0));
      e[p - cols.size()] = T(1);
      basis.set_column(next++, e);
    }
  }
  auto binv = inverse(basis, tol);
  if (!binv) throw InvariantViolation("generalized_inverse: complement basis is singular");
  Matrix<T> g(n, m);
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t c = 0; c < m; ++c) g(cols[j], c) = (*binv)(j, c);
  return g;
}

} // namespace perturba
