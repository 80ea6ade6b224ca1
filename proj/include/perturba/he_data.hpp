#pragma once

#include <string>
#include <vector>

#include "perturba/complex.hpp"

namespace perturba {

/// Homotopy-equivalence data (L, b) <-> (M, b) with i : L -> M, p : M -> L
/// and h on M satisfying  i p = 1 + b h + h b.
template <Scalar T> struct HEData {
  Complex<T> L;
  Complex<T> M;
  GradedMap<T> i; ///< L -> M
  GradedMap<T> p; ///< M -> L
  GradedMap<T> h; ///< M -> M, degree -1
};

/// One line of a verification report.
struct Check {
  std::string name;
  int degree = 0;
  double residual = 0.0;
  bool ok = true;
};

struct Report {
  std::vector<Check> checks;
  bool ok() const {
    for (const auto &c : checks)
      if (!c.ok) return false;
    return true;
  }
  const Check *first_failure() const {
    for (const auto &c : checks)
      if (!c.ok) return &c;
    return nullptr;
  }
  void append(const Report &o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

namespace detail {
/// Record one residual per active degree of `residual`; `ok` per tolerance.
template <Scalar T>
void record_residual(Report &r, const std::string &name, const GradedMap<T> &residual, const Tolerance &tol) {
  for (int k : residual.active_degrees()) {
    const auto b = residual.block(k);
    r.checks.push_back({name, k, b.max_abs(), b.is_zero(tol)});
  }
}
} // namespace detail

/// Checks b^2 = 0 on both sides, i and p chain maps, ip = 1 + bh + hb, and
/// that i and p are quasi-isomorphisms.
template <Scalar T> Report verify_he(const HEData<T> &he, const Tolerance &tol = {}) {
  Report r;
  const auto &bl = he.L.d();
  const auto &bm = he.M.d();
  detail::record_residual(r, "L: b^2 = 0", compose(bl, bl), tol);
  detail::record_residual(r, "M: b^2 = 0", compose(bm, bm), tol);
  detail::record_residual(r, "i b = b i", compose(he.i, bl) - compose(bm, he.i), tol);
  detail::record_residual(r, "b p = p b", compose(bl, he.p) - compose(he.p, bm), tol);
  const auto homotopy_residual = compose(he.i, he.p) - identity<T>(he.M.module()) - compose(bm, he.h) -
                                 compose(he.h, bm);
  detail::record_residual(r, "ip = 1 + bh + hb", homotopy_residual, tol);
  if (r.ok()) {
    r.checks.push_back({"i quasi-isomorphism", 0, 0.0, is_quasi_iso(he.i, he.L, he.M, tol)});
    r.checks.push_back({"p quasi-isomorphism", 0, 0.0, is_quasi_iso(he.p, he.M, he.L, tol)});
  }
  return r;
}

template <Scalar T> void require_he(const HEData<T> &he, const std::string &context, const Tolerance &tol = {}) {
  auto r = verify_he(he, tol);
  if (const Check *bad = r.first_failure())
    throw InvariantViolation(context + ": " + bad->name + " fails at degree " + std::to_string(bad->degree));
}

/// p i = 1.
template <Scalar T> bool is_dr(const HEData<T> &he, const Tolerance &tol = {}) {
  return equal(compose(he.p, he.i), identity<T>(he.L.module()), tol);
}

/// DR with the side conditions h i = 0, p h = 0, h^2 = 0.
template <Scalar T> bool is_special_dr(const HEData<T> &he, const Tolerance &tol = {}) {
  return is_dr(he, tol) && compose(he.h, he.i).is_zero(tol) && compose(he.p, he.h).is_zero(tol) &&
         compose(he.h, he.h).is_zero(tol);
}

/// Turns a DR into a special DR. Under the convention ip = 1 + bh + hb the
/// three classical rewrites need a sign: h <- -h(bh+hb), h <- -(bh+hb)h,
/// h <- -hbh. Each one is the identity on an already special DR.
template <Scalar T> HEData<T> specialize_dr(const HEData<T> &he, const Tolerance &tol = {}) {
  if (!is_dr(he, tol)) throw PreconditionViolation("specialize_dr: p i != 1");
  const auto &b = he.M.d();
  HEData<T> out = he;
  auto bracket = [&](const GradedMap<T> &h) { return compose(b, h) + compose(h, b); };
  out.h = -compose(out.h, bracket(out.h));
  out.h = -compose(bracket(out.h), out.h);
  out.h = -compose(compose(out.h, b), out.h);
  if (!is_special_dr(out, tol)) throw InvariantViolation("specialize_dr: result is not a special DR");
  require_he(out, "specialize_dr", tol);
  return out;
}

} // namespace perturba
