#pragma once

#include <map>
#include <set>

#include "perturba/graded.hpp"

namespace perturba {

enum class Orientation { Cochain, Chain };

/// Complex stored in cochain orientation (differential of degree +1). Chain
/// complexes are re-indexed by negating degrees; `orientation()` records the
/// caller's original convention.
template <Scalar T> class Complex {
public:
  Complex() = default;
  Complex(GradedModule module, GradedMap<T> d, Orientation orientation = Orientation::Cochain)
      : module_(std::move(module)), d_(std::move(d)), orientation_(orientation) {
    if (d_.source() != module_ || d_.target() != module_ || d_.shift() != 1)
      throw ShapeMismatch("differential must be a degree +1 endomorphism of the module");
  }

  /// Complex with the zero differential.
  static Complex zero(const GradedModule &m) { return Complex(m, GradedMap<T>(m, m, 1)); }

  /// From chain data: dims[n] and d[n] : C_n -> C_{n-1}.
  static Complex from_chain(const std::map<int, int> &dims, const std::map<int, Matrix<T>> &d) {
    GradedModule m;
    for (auto [n, dim] : dims) m.set_dim(-n, dim);
    GradedMap<T> diff(m, m, 1);
    for (const auto &[n, block] : d) diff.set_block(-n, block);
    return Complex(m, diff, Orientation::Chain);
  }

  const GradedModule &module() const noexcept { return module_; }
  const GradedMap<T> &d() const noexcept { return d_; }
  Orientation orientation() const noexcept { return orientation_; }
  int dim(int k) const { return module_.dim(k); }

  /// Same module, new differential.
  Complex with_differential(GradedMap<T> d) const { return Complex(module_, std::move(d), orientation_); }

private:
  GradedModule module_;
  GradedMap<T> d_;
  Orientation orientation_ = Orientation::Cochain;
};

template <Scalar T> bool is_complex(const Complex<T> &c, const Tolerance &tol = {}) {
  return compose(c.d(), c.d()).is_zero(tol);
}

/// Cohomology in a single degree, with a membership test for coboundaries.
template <Scalar T> struct CohomologyData {
  int degree = 0;
  int dim = 0;
  Matrix<T> representatives; ///< columns in ker d_k, independent modulo im d_{k-1}
  Matrix<T> incoming;        ///< d_{k-1}
  Tolerance tol;

  /// True iff v = d_{k-1}(x) for some x.
  bool is_coboundary(const Vector<T> &v) const { return solve(incoming, v, tol).has_value(); }
  /// Some x with d_{k-1} x = v, if one exists.
  std::optional<Vector<T>> primitive(const Vector<T> &v) const { return solve(incoming, v, tol); }
};

namespace detail {
/// Column basis of the column space of a (pivot columns).
template <Scalar T> Matrix<T> column_space(const Matrix<T> &a, const Tolerance &tol) {
  auto piv = row_reduce(a, tol).pivots;
  Matrix<T> b(a.rows(), piv.size());
  for (std::size_t j = 0; j < piv.size(); ++j) b.set_column(j, a.column(piv[j]));
  return b;
}
} // namespace detail

/// dim H^k = dim ker d_k - rank d_{k-1}, plus representatives completing a
/// basis of im d_{k-1} to one of ker d_k.
template <Scalar T> CohomologyData<T> cohomology_basis(const Complex<T> &c, int k, const Tolerance &tol = {}) {
  CohomologyData<T> out;
  out.degree = k;
  out.tol = tol;
  out.incoming = c.d().block(k - 1);
  const Matrix<T> outgoing = c.d().block(k);
  const Matrix<T> ker = kernel_basis(outgoing, tol);
  const Matrix<T> img = detail::column_space(out.incoming, tol);
  auto re = row_reduce(hstack(img, ker), tol);
  std::vector<std::size_t> reps;
  for (auto p : re.pivots)
    if (p >= img.cols()) reps.push_back(p - img.cols());
  out.representatives = Matrix<T>(static_cast<std::size_t>(c.dim(k)), reps.size());
  for (std::size_t j = 0; j < reps.size(); ++j) out.representatives.set_column(j, ker.column(reps[j]));
  out.dim = static_cast<int>(reps.size());
  if (static_cast<std::size_t>(out.dim) != ker.cols() - img.cols())
    throw InvariantViolation("cohomology_basis: image of d_{k-1} not contained in ker d_k");
  return out;
}

template <Scalar T>
bool is_chain_map(const GradedMap<T> &f, const Complex<T> &c, const Complex<T> &d, const Tolerance &tol = {}) {
  if (f.shift() != 0) throw ShapeMismatch("chain map must have degree 0");
  if (f.source() != c.module() || f.target() != d.module())
    throw ShapeMismatch("chain map source/target do not match the complexes");
  return equal(compose(d.d(), f), compose(f, c.d()), tol);
}

/// Induced map on cohomology is bijective in every degree of the joint support.
template <Scalar T>
bool is_quasi_iso(const GradedMap<T> &f, const Complex<T> &c, const Complex<T> &d, const Tolerance &tol = {}) {
  if (!is_chain_map(f, c, d, tol)) throw PreconditionViolation("is_quasi_iso: not a chain map");
  std::set<int> degrees = c.module().support();
  for (int k : d.module().support()) degrees.insert(k);
  for (int k : degrees) {
    auto hc = cohomology_basis(c, k, tol);
    auto hd = cohomology_basis(d, k, tol);
    if (hc.dim != hd.dim) return false;
    if (hc.dim == 0) continue;
    const Matrix<T> img = detail::column_space(hd.incoming, tol);
    const Matrix<T> mapped = f.block(k) * hc.representatives;
    if (rank(hstack(img, mapped), tol) != img.cols() + static_cast<std::size_t>(hc.dim)) return false;
  }
  return true;
}

/// f - g == d_D h + h d_C.
template <Scalar T>
bool is_homotopy(const GradedMap<T> &h, const GradedMap<T> &f, const GradedMap<T> &g, const Complex<T> &c,
                 const Complex<T> &d, const Tolerance &tol = {}) {
  if (h.shift() != -1) throw ShapeMismatch("homotopy must have degree -1");
  return equal(f - g, compose(d.d(), h) + compose(h, c.d()), tol);
}

} // namespace perturba
