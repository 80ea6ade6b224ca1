#pragma once

#include <map>
#include <set>
#include <string>

#include "perturba/matrix.hpp"

namespace perturba {

/// Finite-dimensional graded vector space: degree -> dimension, finite support.
class GradedModule {
public:
  GradedModule() = default;
  explicit GradedModule(const std::map<int, int> &dims) {
    for (auto [k, d] : dims) set_dim(k, d);
  }

  int dim(int degree) const {
    auto it = dims_.find(degree);
    return it == dims_.end() ? 0 : it->second;
  }
  void set_dim(int degree, int d) {
    if (d < 0) throw ShapeMismatch("negative dimension at degree " + std::to_string(degree));
    if (d == 0) dims_.erase(degree);
    else dims_[degree] = d;
  }
  const std::map<int, int> &dims() const noexcept { return dims_; }
  std::set<int> support() const {
    std::set<int> s;
    for (auto [k, d] : dims_) s.insert(k);
    return s;
  }
  int total_dim() const {
    int t = 0;
    for (auto [k, d] : dims_) t += d;
    return t;
  }

  friend bool operator==(const GradedModule &, const GradedModule &) = default;

private:
  std::map<int, int> dims_;
};

/// Linear map of a fixed degree between graded modules, stored blockwise:
/// block(k) : source[k] -> target[k + shift]. Missing blocks are zero.
template <Scalar T> class GradedMap {
public:
  GradedMap() = default;
  GradedMap(GradedModule source, GradedModule target, int shift)
      : source_(std::move(source)), target_(std::move(target)), shift_(shift) {}

  static GradedMap zero(const GradedModule &source, const GradedModule &target, int shift) {
    return GradedMap(source, target, shift);
  }
  static GradedMap identity(const GradedModule &m) {
    GradedMap id(m, m, 0);
    for (auto [k, d] : m.dims()) id.blocks_[k] = Matrix<T>::identity(d);
    return id;
  }

  const GradedModule &source() const noexcept { return source_; }
  const GradedModule &target() const noexcept { return target_; }
  int shift() const noexcept { return shift_; }

  /// Block at source degree k, materialized as zeros when absent.
  Matrix<T> block(int k) const {
    auto it = blocks_.find(k);
    if (it != blocks_.end()) return it->second;
    return Matrix<T>(target_.dim(k + shift_), source_.dim(k));
  }
  void set_block(int k, Matrix<T> m) {
    const auto rows = static_cast<std::size_t>(target_.dim(k + shift_));
    const auto cols = static_cast<std::size_t>(source_.dim(k));
    if (m.rows() != rows || m.cols() != cols)
      throw ShapeMismatch("block at degree " + std::to_string(k) + " is " + m.shape_str() +
                          ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    if (rows == 0 || cols == 0) {
      blocks_.erase(k);
      return;
    }
    blocks_[k] = std::move(m);
  }
  const std::map<int, Matrix<T>> &blocks() const noexcept { return blocks_; }

  /// Degrees k where block(k) can be nonzero.
  std::set<int> active_degrees() const {
    std::set<int> s;
    for (auto [k, d] : source_.dims())
      if (target_.dim(k + shift_) > 0) s.insert(k);
    return s;
  }

  bool is_zero(const Tolerance &tol = {}) const {
    for (const auto &[k, m] : blocks_)
      if (!m.is_zero(tol)) return false;
    return true;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto &[k, b] : blocks_) m = std::max(m, b.max_abs());
    return m;
  }

  GradedMap operator-() const {
    GradedMap r(*this);
    for (auto &[k, m] : r.blocks_) m = -m;
    return r;
  }

  template <Scalar U> GradedMap<U> cast() const {
    GradedMap<U> r(source_, target_, shift_);
    for (const auto &[k, m] : blocks_) r.set_block(k, m.template cast<U>());
    return r;
  }

private:
  GradedModule source_;
  GradedModule target_;
  int shift_ = 0;
  std::map<int, Matrix<T>> blocks_;
};

namespace detail {
template <Scalar T> void require_same_signature(const GradedMap<T> &f, const GradedMap<T> &g, const char *op) {
  if (f.source() != g.source() || f.target() != g.target() || f.shift() != g.shift())
    throw ShapeMismatch(std::string(op) + ": graded maps differ in source, target or shift");
}
} // namespace detail

/// f o g. Requires g.target() == f.source().
template <Scalar T> GradedMap<T> compose(const GradedMap<T> &f, const GradedMap<T> &g) {
  if (g.target() != f.source()) {
    for (int k : g.target().support())
      if (g.target().dim(k) != f.source().dim(k))
        throw ShapeMismatch("compose: degree " + std::to_string(k) + " has dimension " +
                            std::to_string(g.target().dim(k)) + " vs " + std::to_string(f.source().dim(k)));
    for (int k : f.source().support())
      if (g.target().dim(k) != f.source().dim(k))
        throw ShapeMismatch("compose: degree " + std::to_string(k) + " has dimension " +
                            std::to_string(g.target().dim(k)) + " vs " + std::to_string(f.source().dim(k)));
  }
  GradedMap<T> out(g.source(), f.target(), f.shift() + g.shift());
  for (const auto &[k, gb] : g.blocks()) {
    const int mid = k + g.shift();
    auto it = f.blocks().find(mid);
    if (it == f.blocks().end()) continue;
    out.set_block(k, it->second * gb);
  }
  return out;
}

template <Scalar T> GradedMap<T> add(const GradedMap<T> &f, const GradedMap<T> &g) {
  detail::require_same_signature(f, g, "add");
  GradedMap<T> out(f);
  for (const auto &[k, gb] : g.blocks()) out.set_block(k, out.block(k) + gb);
  return out;
}

template <Scalar T> GradedMap<T> scale(const T &c, const GradedMap<T> &f) {
  GradedMap<T> out(f.source(), f.target(), f.shift());
  if (c == T(0)) return out;
  for (const auto &[k, b] : f.blocks()) out.set_block(k, c * b);
  return out;
}

template <Scalar T> GradedMap<T> operator*(const GradedMap<T> &f, const GradedMap<T> &g) { return compose(f, g); }
template <Scalar T> GradedMap<T> operator+(const GradedMap<T> &f, const GradedMap<T> &g) { return add(f, g); }
template <Scalar T> GradedMap<T> operator-(const GradedMap<T> &f, const GradedMap<T> &g) { return add(f, -g); }
template <Scalar T> GradedMap<T> operator*(const T &c, const GradedMap<T> &f) { return scale(c, f); }

template <Scalar T> GradedMap<T> identity(const GradedModule &m) { return GradedMap<T>::identity(m); }

/// Blockwise equality with implicit zero blocks (exact, or within tol for Float64).
template <Scalar T> bool equal(const GradedMap<T> &f, const GradedMap<T> &g, const Tolerance &tol = {}) {
  if (f.source() != g.source() || f.target() != g.target() || f.shift() != g.shift()) return false;
  for (int k : f.active_degrees())
    if (!approx_equal(f.block(k), g.block(k), tol)) return false;
  return true;
}

} // namespace perturba
