#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "perturba/perturbation.hpp"

namespace perturba {

using Bidegree = std::pair<int, int>; ///< (p, q)

inline std::string bidegree_str(const Bidegree &b) {
  return "(" + std::to_string(b.first) + "," + std::to_string(b.second) + ")";
}

/// Double complex in the first quadrant. The horizontal differential lowers p
/// (as in the augmented rows H_q <- C_{0,q} <- C_{1,q} <- ...), the vertical
/// one raises q, and they anticommute.
template <Scalar T> class DoubleComplex {
public:
  DoubleComplex() = default;
  explicit DoubleComplex(std::map<Bidegree, int> dims) : dims_(std::move(dims)) {
    for (auto it = dims_.begin(); it != dims_.end();) {
      if (it->first.first < 0 || it->first.second < 0) throw ShapeMismatch("double complex: negative bidegree");
      it = it->second == 0 ? dims_.erase(it) : std::next(it);
    }
  }

  int dim(int p, int q) const {
    auto it = dims_.find({p, q});
    return it == dims_.end() ? 0 : it->second;
  }
  const std::map<Bidegree, int> &dims() const noexcept { return dims_; }
  int max_p() const {
    int m = 0;
    for (auto &[b, d] : dims_) m = std::max(m, b.first);
    return m;
  }
  int max_q() const {
    int m = 0;
    for (auto &[b, d] : dims_) m = std::max(m, b.second);
    return m;
  }

  /// d : C_{p,q} -> C_{p-1,q}
  Matrix<T> horizontal(int p, int q) const { return get(horizontal_, p, q, dim(p - 1, q)); }
  /// delta : C_{p,q} -> C_{p,q+1}
  Matrix<T> vertical(int p, int q) const { return get(vertical_, p, q, dim(p, q + 1)); }

  void set_horizontal(int p, int q, Matrix<T> m) { set(horizontal_, p, q, dim(p - 1, q), std::move(m), "horizontal"); }
  void set_vertical(int p, int q, Matrix<T> m) { set(vertical_, p, q, dim(p, q + 1), std::move(m), "vertical"); }

  /// Residuals of d^2 = delta^2 = d delta + delta d = 0; throws InvariantViolation.
  void validate(const Tolerance &tol = {}) const {
    for (auto &[b, n] : dims_) {
      const auto [p, q] = b;
      if (!(horizontal(p - 1, q) * horizontal(p, q)).is_zero(tol))
        throw InvariantViolation("d^2 != 0 at " + bidegree_str(b));
      if (!(vertical(p, q + 1) * vertical(p, q)).is_zero(tol))
        throw InvariantViolation("delta^2 != 0 at " + bidegree_str(b));
      if (!(horizontal(p, q + 1) * vertical(p, q) + vertical(p - 1, q) * horizontal(p, q)).is_zero(tol))
        throw InvariantViolation("d delta + delta d != 0 at " + bidegree_str(b));
    }
  }

  /// Same data with delta on C_{p,q} multiplied by (-1)^p, turning commuting
  /// squares into anticommuting ones.
  DoubleComplex with_koszul_signs() const {
    DoubleComplex out = *this;
    for (auto &[b, m] : out.vertical_)
      if (b.first % 2 != 0) m = -m;
    return out;
  }

private:
  Matrix<T> get(const std::map<Bidegree, Matrix<T>> &blocks, int p, int q, int rows) const {
    auto it = blocks.find({p, q});
    if (it != blocks.end()) return it->second;
    return Matrix<T>(static_cast<std::size_t>(std::max(rows, 0)), static_cast<std::size_t>(dim(p, q)));
  }
  void set(std::map<Bidegree, Matrix<T>> &blocks, int p, int q, int rows, Matrix<T> m, const char *what) {
    if (m.rows() != static_cast<std::size_t>(rows) || m.cols() != static_cast<std::size_t>(dim(p, q)))
      throw ShapeMismatch(std::string(what) + " block at " + bidegree_str({p, q}) + " has shape " + m.shape_str() +
                          ", expected " + std::to_string(rows) + "x" + std::to_string(dim(p, q)));
    blocks[{p, q}] = std::move(m);
  }

  std::map<Bidegree, int> dims_;
  std::map<Bidegree, Matrix<T>> horizontal_;
  std::map<Bidegree, Matrix<T>> vertical_;
};

/// Tot^n = (+)_{q-p=n} C_{p,q}, summands ordered by increasing p. Both d and
/// delta raise n by one; the row homotopy lowers it.
struct TotLayout {
  std::map<int, std::vector<Bidegree>> summands;
  std::map<Bidegree, int> offset;
  GradedModule module;

  template <Scalar T> static TotLayout of(const DoubleComplex<T> &dc) {
    TotLayout l;
    for (auto &[b, n] : dc.dims()) l.summands[b.second - b.first].push_back(b);
    for (auto &[deg, list] : l.summands) {
      int off = 0;
      for (auto &b : list) {
        l.offset[b] = off;
        off += dc.dim(b.first, b.second);
      }
      l.module.set_dim(deg, off);
    }
    return l;
  }
  int degree(const Bidegree &b) const { return b.second - b.first; }
};

namespace detail {
/// Assemble a map on Tot from blocks C_{p,q} -> C_{p+dp,q+dq}.
template <Scalar T, class F>
GradedMap<T> assemble(const DoubleComplex<T> &dc, const TotLayout &l, int dp, int dq, F &&block) {
  const int shift = dq - dp;
  GradedMap<T> out(l.module, l.module, shift);
  for (auto &[deg, list] : l.summands) {
    Matrix<T> m(static_cast<std::size_t>(l.module.dim(deg + shift)), static_cast<std::size_t>(l.module.dim(deg)));
    bool any = false;
    for (auto &b : list) {
      const Bidegree t{b.first + dp, b.second + dq};
      if (dc.dim(t.first, t.second) == 0) continue;
      m.set_block(l.offset.at(t), l.offset.at(b), block(b.first, b.second));
      any = true;
    }
    if (any) out.set_block(deg, m);
  }
  return out;
}
} // namespace detail

template <Scalar T> GradedMap<T> tot_horizontal(const DoubleComplex<T> &dc, const TotLayout &l) {
  return detail::assemble(dc, l, -1, 0, [&](int p, int q) { return dc.horizontal(p, q); });
}
template <Scalar T> GradedMap<T> tot_vertical(const DoubleComplex<T> &dc, const TotLayout &l) {
  return detail::assemble(dc, l, 0, 1, [&](int p, int q) { return dc.vertical(p, q); });
}

/// (Tot(C), d + delta), cochain oriented.
template <Scalar T> Complex<T> total_complex(const DoubleComplex<T> &dc, const Tolerance &tol = {}) {
  dc.validate(tol);
  const auto l = TotLayout::of(dc);
  Complex<T> tot(l.module, tot_horizontal(dc, l) + tot_vertical(dc, l));
  if (!is_complex(tot, tol)) throw InvariantViolation("total complex: (d + delta)^2 != 0");
  return tot;
}

/// Contractions of the augmented rows: p i = 1 and i p = d h + h d + 1, with
/// h : C_{p,q} -> C_{p+1,q}.
template <Scalar T> struct RowContraction {
  std::map<int, Matrix<T>> i;      ///< H_q -> C_{0,q}
  std::map<int, Matrix<T>> p;      ///< C_{0,q} -> H_q
  std::map<Bidegree, Matrix<T>> h; ///< C_{p,q} -> C_{p+1,q}

  int dim_h(int q) const {
    auto it = i.find(q);
    return it == i.end() ? 0 : static_cast<int>(it->second.cols());
  }
  Matrix<T> h_block(const DoubleComplex<T> &dc, int pp, int q) const {
    auto it = h.find({pp, q});
    if (it != h.end()) return it->second;
    return Matrix<T>(dc.dim(pp + 1, q), dc.dim(pp, q));
  }
  Matrix<T> i_block(const DoubleComplex<T> &dc, int q) const {
    auto it = i.find(q);
    return it != i.end() ? it->second : Matrix<T>(dc.dim(0, q), 0);
  }
  Matrix<T> p_block(const DoubleComplex<T> &dc, int q) const {
    auto it = p.find(q);
    return it != p.end() ? it->second : Matrix<T>(0, dc.dim(0, q));
  }

  bool valid(const DoubleComplex<T> &dc, const Tolerance &tol = {}) const {
    for (int q = 0; q <= dc.max_q(); ++q) {
      const auto iq = i_block(dc, q), pq = p_block(dc, q);
      if (!approx_equal(pq * iq, Matrix<T>::identity(iq.cols()), tol)) return false;
      if (!(pq * dc.horizontal(1, q)).is_zero(tol)) return false;
      for (int pp = 0; pp <= dc.max_p(); ++pp) {
        const auto n = static_cast<std::size_t>(dc.dim(pp, q));
        auto lhs = dc.horizontal(pp + 1, q) * h_block(dc, pp, q) + Matrix<T>::identity(n);
        if (pp > 0) lhs += h_block(dc, pp - 1, q) * dc.horizontal(pp, q);
        const auto rhs = pp == 0 ? iq * pq : Matrix<T>(n, n);
        if (!approx_equal(lhs, rhs, tol)) return false;
      }
    }
    return true;
  }
};

/// Row contraction by reflexive generalized inverses G of d, built left to
/// right: s_0 = G(1 - ip), s_p = G(1 - s_{p-1} d); h = -s. The cokernel H_q of
/// d : C_{1,q} -> C_{0,q} is split by a coordinate complement of im d.
template <Scalar T> RowContraction<T> build_row_contraction(const DoubleComplex<T> &dc, const Tolerance &tol = {}) {
  RowContraction<T> rc;
  for (int q = 0; q <= dc.max_q(); ++q) {
    const auto n0 = static_cast<std::size_t>(dc.dim(0, q));
    const auto d1 = dc.horizontal(1, q);
    // Complement of im d1 in C_{0,q}.
    const auto img = detail::column_space(d1, tol);
    auto ext = row_reduce(hstack(img, Matrix<T>::identity(n0)), tol);
    std::vector<std::size_t> extra;
    for (auto piv : ext.pivots)
      if (piv >= img.cols()) extra.push_back(piv - img.cols());
    Matrix<T> basis(n0, n0);
    basis.set_block(0, 0, img);
    for (std::size_t j = 0; j < extra.size(); ++j) basis(extra[j], img.cols() + j) = T(1);
    auto binv = inverse(basis, tol);
    if (!binv) throw InvariantViolation("build_row_contraction: complement basis singular");
    const auto hq = extra.size();
    Matrix<T> iq = basis.block(0, img.cols(), n0, hq);
    Matrix<T> pq = binv->block(img.cols(), 0, hq, n0);
    rc.i[q] = iq;
    rc.p[q] = pq;
    Matrix<T> prev_s; // s_{p-1}
    for (int pp = 0; pp <= dc.max_p(); ++pp) {
      const auto n = static_cast<std::size_t>(dc.dim(pp, q));
      const auto g = generalized_inverse(dc.horizontal(pp + 1, q), tol);
      Matrix<T> s = pp == 0 ? g * (Matrix<T>::identity(n) - iq * pq)
                            : g * (Matrix<T>::identity(n) - prev_s * dc.horizontal(pp, q));
      rc.h[{pp, q}] = -s;
      prev_s = std::move(s);
    }
  }
  if (!rc.valid(dc, tol))
    throw PreconditionViolation("build_row_contraction: some row has cohomology in positive degree");
  return rc;
}

template <Scalar T> struct RowContractionTransfer {
  HEData<T> base; ///< (H, 0) <-> (Tot, d)
  HEData<T> dr;   ///< (H, delta) <-> (Tot, d + delta)
  TotLayout layout;
  GradedMap<T> delta; ///< vertical differential on Tot
};

/// The DR (H_*, delta) <-> (Tot C, d + delta), obtained by perturbing
/// (H_*, 0) <-> (Tot C, d) by delta.
template <Scalar T>
RowContractionTransfer<T> contract_rows(const DoubleComplex<T> &dc, const RowContraction<T> &rc,
                                        const Tolerance &tol = {}) {
  dc.validate(tol);
  if (!rc.valid(dc, tol)) throw PreconditionViolation("contract_rows: row contraction identities fail");
  const auto l = TotLayout::of(dc);
  GradedModule hm;
  for (int q = 0; q <= dc.max_q(); ++q) hm.set_dim(q, rc.dim_h(q));
  GradedMap<T> i(hm, l.module, 0), p(l.module, hm, 0);
  for (int q = 0; q <= dc.max_q(); ++q) {
    if (rc.dim_h(q) == 0 || dc.dim(0, q) == 0) continue;
    Matrix<T> ib(l.module.dim(q), rc.dim_h(q)), pb(rc.dim_h(q), l.module.dim(q));
    ib.set_block(l.offset.at({0, q}), 0, rc.i.at(q));
    pb.set_block(0, l.offset.at({0, q}), rc.p.at(q));
    i.set_block(q, ib);
    p.set_block(q, pb);
  }
  auto h = detail::assemble(dc, l, 1, 0, [&](int pp, int q) { return rc.h_block(dc, pp, q); });
  HEData<T> base{Complex<T>::zero(hm), Complex<T>(l.module, tot_horizontal(dc, l)), i, p, h};
  require_he(base, "contract_rows (unperturbed)", tol);
  const auto delta = tot_vertical(dc, l);
  SmallnessCertificate<T> cert;
  try {
    cert = certify_smallness(delta, h, tol);
  } catch (const NotSmall &) {
    throw InvariantViolation("contract_rows: delta h not invertible despite bounded support");
  }
  auto dr = perturb(base, delta, cert, tol);
  if (!perturbed_dr_condition(base, delta, cert, tol) || !is_dr(dr, tol))
    throw InvariantViolation("contract_rows: output is not a DR");
  return {base, dr, l, delta};
}

/// Chain complex A (+) A' with d = [[alpha, beta], [gamma, delta]] and a
/// homotopy H on A' with H delta + delta H = 1. Maps are keyed by the source
/// chain degree n (d : X_n -> X_{n-1}, H : A'_n -> A'_{n+1}).
template <Scalar T> struct BlockComplex {
  std::map<int, int> dim_a, dim_b;
  std::map<int, Matrix<T>> alpha, beta, gamma, delta, H;

  int a(int n) const { return get(dim_a, n); }
  int b(int n) const { return get(dim_b, n); }
  Matrix<T> block(const std::map<int, Matrix<T>> &m, int n, int rows, int cols) const {
    auto it = m.find(n);
    if (it != m.end()) {
      if (it->second.rows() != static_cast<std::size_t>(rows) || it->second.cols() != static_cast<std::size_t>(cols))
        throw ShapeMismatch("block complex: block at degree " + std::to_string(n) + " has shape " +
                            it->second.shape_str() + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
      return it->second;
    }
    return Matrix<T>(rows, cols);
  }
  Matrix<T> al(int n) const { return block(alpha, n, a(n - 1), a(n)); }
  Matrix<T> be(int n) const { return block(beta, n, a(n - 1), b(n)); }
  Matrix<T> ga(int n) const { return block(gamma, n, b(n - 1), a(n)); }
  Matrix<T> de(int n) const { return block(delta, n, b(n - 1), b(n)); }
  Matrix<T> ho(int n) const { return block(H, n, b(n + 1), b(n)); }

  std::set<int> degrees() const {
    std::set<int> s;
    for (auto [n, d] : dim_a) s.insert(n);
    for (auto [n, d] : dim_b) s.insert(n);
    return s;
  }

  /// A (+) A' as a cochain-stored complex (degree -n), A first.
  Complex<T> total() const {
    GradedModule m;
    for (int n : degrees()) m.set_dim(-n, a(n) + b(n));
    GradedMap<T> d(m, m, 1);
    for (int n : degrees()) {
      Matrix<T> blk(a(n - 1) + b(n - 1), a(n) + b(n));
      blk.set_block(0, 0, al(n));
      blk.set_block(0, a(n), be(n));
      blk.set_block(a(n - 1), 0, ga(n));
      blk.set_block(a(n - 1), a(n), de(n));
      d.set_block(-n, blk);
    }
    return Complex<T>(m, d, Orientation::Chain);
  }

  void validate(const Tolerance &tol = {}) const {
    if (!is_complex(total(), tol)) throw PreconditionViolation("block complex: d^2 != 0");
    for (int n : degrees()) {
      auto r = ho(n - 1) * de(n) + de(n + 1) * ho(n) - Matrix<T>::identity(b(n));
      if (!r.is_zero(tol)) throw PreconditionViolation("block complex: H delta + delta H != 1 at degree " + std::to_string(n));
    }
  }

private:
  static int get(const std::map<int, int> &m, int n) {
    auto it = m.find(n);
    return it == m.end() ? 0 : it->second;
  }
};

/// alpha - beta H gamma, keyed by cochain degree -n.
template <Scalar T> GradedMap<T> kill_contractible_closed_form(const BlockComplex<T> &bc) {
  GradedModule am;
  for (int n : bc.degrees()) am.set_dim(-n, bc.a(n));
  GradedMap<T> out(am, am, 1);
  for (int n : bc.degrees()) out.set_block(-n, bc.al(n) - bc.be(n) * bc.ho(n - 1) * bc.ga(n));
  return out;
}

/// HE (A, alpha - beta H gamma) <-> (A (+) A', d) by perturbing
/// (A, 0) <-> (A (+) A', diag(0, delta)) with h = diag(0, -H) by
/// [[alpha, beta], [gamma, 0]].
template <Scalar T> HEData<T> kill_contractible(const BlockComplex<T> &bc, const Tolerance &tol = {}) {
  bc.validate(tol);
  const auto full = bc.total();
  const auto &m = full.module();
  GradedModule am;
  for (int n : bc.degrees()) am.set_dim(-n, bc.a(n));
  GradedMap<T> b0(m, m, 1), pert(m, m, 1), h(m, m, -1), i(am, m, 0), p(m, am, 0);
  for (int n : bc.degrees()) {
    const int k = -n;
    Matrix<T> bb(m.dim(k + 1), m.dim(k)), pb(m.dim(k + 1), m.dim(k)), hb(m.dim(k - 1), m.dim(k));
    bb.set_block(bc.a(n - 1), bc.a(n), bc.de(n));
    pb.set_block(0, 0, bc.al(n));
    pb.set_block(0, bc.a(n), bc.be(n));
    pb.set_block(bc.a(n - 1), 0, bc.ga(n));
    hb.set_block(bc.a(n + 1), bc.a(n), -bc.ho(n));
    b0.set_block(k, bb);
    pert.set_block(k, pb);
    h.set_block(k, hb);
    Matrix<T> ib(m.dim(k), bc.a(n)), prb(bc.a(n), m.dim(k));
    for (int j = 0; j < bc.a(n); ++j) ib(j, j) = prb(j, j) = T(1);
    i.set_block(k, ib);
    p.set_block(k, prb);
  }
  HEData<T> base{Complex<T>::zero(am), Complex<T>(m, b0, Orientation::Chain), i, p, h};
  require_he(base, "kill_contractible (unperturbed)", tol);
  auto out = perturb(base, pert, certify_smallness(pert, h, tol), tol);
  if (!equal(out.L.d(), kill_contractible_closed_form(bc), tol))
    throw InvariantViolation("kill_contractible: b1 differs from alpha - beta H gamma");
  return out;
}

} // namespace perturba
