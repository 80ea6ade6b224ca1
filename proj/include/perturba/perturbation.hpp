#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perturba/he_data.hpp"

namespace perturba {

/// (b + delta)^2 = 0 with delta of degree +1 on M.
template <Scalar T> bool is_perturbation(const Complex<T> &M, const GradedMap<T> &delta, const Tolerance &tol = {}) {
  if (delta.shift() != 1 || !(delta.source() == M.module()) || !(delta.target() == M.module())) return false;
  const auto bd = M.d() + delta;
  return compose(bd, bd).is_zero(tol);
}

template <Scalar T> void require_perturbation(const Complex<T> &M, const GradedMap<T> &delta, const Tolerance &tol = {}) {
  if (delta.shift() != 1) throw ShapeMismatch("perturbation must have degree +1");
  if (!(delta.source() == M.module()) || !(delta.target() == M.module()))
    throw ShapeMismatch("perturbation must be an endomorphism of M");
  const auto bd = M.d() + delta;
  const auto sq = compose(bd, bd);
  for (int k : sq.active_degrees())
    if (!sq.block(k).is_zero(tol))
      throw PreconditionViolation("(b + delta)^2 != 0 at degree " + std::to_string(k));
}

enum class SmallnessKind { DegreewiseInverse, Nilpotent };

/// Witness that 1 - delta h is invertible: its inverse in every degree, plus
/// the nilpotency order of delta h when that is how it was obtained.
template <Scalar T> struct SmallnessCertificate {
  SmallnessKind kind = SmallnessKind::DegreewiseInverse;
  GradedMap<T> inverse; ///< (1 - delta h)^{-1}, degree 0 on M
  std::map<int, int> nilpotency_order;
};

namespace detail {
template <Scalar T> GradedMap<T> delta_h(const GradedMap<T> &delta, const GradedMap<T> &h) {
  if (delta.shift() != 1 || h.shift() != -1) throw ShapeMismatch("smallness: expected deg delta = +1, deg h = -1");
  return compose(delta, h);
}
} // namespace detail

/// Nilpotence route: (delta h)^n = 0 per degree gives sum_{m<n} (delta h)^m.
template <Scalar T>
std::optional<SmallnessCertificate<T>> certify_nilpotent(const GradedMap<T> &delta, const GradedMap<T> &h,
                                                         const Tolerance &tol = {}) {
  const auto dh = detail::delta_h(delta, h);
  SmallnessCertificate<T> cert{SmallnessKind::Nilpotent, GradedMap<T>::identity(dh.source()), {}};
  for (const auto &[k, n] : dh.source().dims()) {
    const auto N = dh.block(k);
    auto power = Matrix<T>::identity(n);
    auto sum = Matrix<T>::identity(n);
    int order = 0;
    for (int m = 1; m <= n + 1; ++m) {
      power = power * N;
      if (power.is_zero(tol)) {
        order = m;
        break;
      }
      sum = sum + power;
    }
    if (order == 0) return std::nullopt;
    cert.nilpotency_order[k] = order;
    cert.inverse.set_block(k, sum);
  }
  return cert;
}

/// Direct inversion first, then nilpotence. Throws NotSmall otherwise.
template <Scalar T>
SmallnessCertificate<T> certify_smallness(const GradedMap<T> &delta, const GradedMap<T> &h, const Tolerance &tol = {}) {
  const auto dh = detail::delta_h(delta, h);
  SmallnessCertificate<T> cert{SmallnessKind::DegreewiseInverse, GradedMap<T>::identity(dh.source()), {}};
  bool all = true;
  int bad = 0;
  for (const auto &[k, n] : dh.source().dims()) {
    std::optional<Matrix<T>> inv;
    try {
      inv = inverse(Matrix<T>::identity(n) - dh.block(k), tol);
    } catch (const NumericRankAmbiguity &) {
      inv.reset();
    }
    if (!inv) {
      all = false;
      bad = k;
      break;
    }
    cert.inverse.set_block(k, *inv);
  }
  if (all) return cert;
  if (auto nil = certify_nilpotent(delta, h, tol)) return *nil;
  throw NotSmall("1 - delta h is not invertible at degree " + std::to_string(bad));
}

/// (1 - delta h) * inverse = 1 = inverse * (1 - delta h) in every degree.
template <Scalar T>
bool validate_certificate(const SmallnessCertificate<T> &cert, const GradedMap<T> &delta, const GradedMap<T> &h,
                          const Tolerance &tol = {}) {
  const auto dh = detail::delta_h(delta, h);
  const auto one = identity<T>(dh.source());
  const auto m = one - dh;
  return equal(compose(m, cert.inverse), one, tol) && equal(compose(cert.inverse, m), one, tol);
}

/// A = (1 - delta h)^{-1} delta.
template <Scalar T>
GradedMap<T> compute_A(const GradedMap<T> &delta, const GradedMap<T> &h, const SmallnessCertificate<T> &cert) {
  (void)h;
  return compose(cert.inverse, delta);
}

/// Residuals of the identities satisfied by A:
///   delta h A = A h delta = A - delta,
///   (1 - delta h)^{-1} = 1 + A h,  (1 - h delta)^{-1} = 1 + h A,
///   A i p A + A b + b A = 0.
template <Scalar T>
Report lemma_relations(const HEData<T> &he, const GradedMap<T> &delta, const GradedMap<T> &A, const Tolerance &tol = {}) {
  Report r;
  const auto &h = he.h;
  const auto &b = he.M.d();
  const auto one = identity<T>(he.M.module());
  const auto amd = A - delta;
  detail::record_residual(r, "(4)", compose(compose(delta, h), A) - amd, tol);
  detail::record_residual(r, "(4)", compose(compose(A, h), delta) - amd, tol);
  const auto l1 = one - compose(delta, h), r1 = one + compose(A, h);
  const auto l2 = one - compose(h, delta), r2 = one + compose(h, A);
  detail::record_residual(r, "(5)", compose(l1, r1) - one, tol);
  detail::record_residual(r, "(5)", compose(r1, l1) - one, tol);
  detail::record_residual(r, "(5)", compose(l2, r2) - one, tol);
  detail::record_residual(r, "(5)", compose(r2, l2) - one, tol);
  detail::record_residual(r, "(6)", compose(compose(compose(A, he.i), he.p), A) + compose(A, b) + compose(b, A), tol);
  return r;
}

/// Same as lemma_relations but throws RelationViolation on the first failure.
template <Scalar T>
Report verify_lemma_relations(const HEData<T> &he, const GradedMap<T> &delta, const GradedMap<T> &A,
                              const Tolerance &tol = {}) {
  auto r = lemma_relations(he, delta, A, tol);
  if (const Check *bad = r.first_failure())
    throw RelationViolation(bad->name, bad->degree,
                            "relation " + bad->name + " fails at degree " + std::to_string(bad->degree));
  return r;
}

/// Transferred data for M with differential b + delta:
///   i1 = i + hAi, p1 = p + pAh, h1 = h + hAh, b1 = b + pAi.
/// The output is re-verified; failure throws InvariantViolation.
template <Scalar T>
HEData<T> perturb(const HEData<T> &he, const GradedMap<T> &delta, const SmallnessCertificate<T> &cert,
                  const Tolerance &tol = {}) {
  require_perturbation(he.M, delta, tol);
  const auto A = compute_A(delta, he.h, cert);
  const auto hA = compose(he.h, A);
  const auto Ah = compose(A, he.h);
  HEData<T> out{he.L.with_differential(he.L.d() + compose(compose(he.p, A), he.i)),
                he.M.with_differential(he.M.d() + delta),
                he.i + compose(hA, he.i),
                he.p + compose(he.p, Ah),
                he.h + compose(hA, he.h)};
  require_he(out, "perturb", tol);
  return out;
}

template <Scalar T> HEData<T> perturb(const HEData<T> &he, const GradedMap<T> &delta, const Tolerance &tol = {}) {
  return perturb(he, delta, certify_smallness(delta, he.h, tol), tol);
}

/// If the input is a DR, the output is a DR iff p(A h h A + A h + h A) i = 0.
template <Scalar T>
bool perturbed_dr_condition(const HEData<T> &he, const GradedMap<T> &delta, const SmallnessCertificate<T> &cert,
                            const Tolerance &tol = {}) {
  const auto A = compute_A(delta, he.h, cert);
  const auto &h = he.h;
  const auto inner = compose(compose(compose(A, h), h), A) + compose(A, h) + compose(h, A);
  return compose(compose(he.p, inner), he.i).is_zero(tol);
}

/// Retract case (ip = 1 on M, h = 0): M keeps b + delta, L gets b + p delta i.
template <Scalar T>
HEData<T> retract_perturb(const Complex<T> &L, const Complex<T> &M, const GradedMap<T> &i, const GradedMap<T> &p,
                          const GradedMap<T> &delta, const Tolerance &tol = {}) {
  HEData<T> he{L, M, i, p, GradedMap<T>::zero(M.module(), M.module(), -1)};
  auto r = verify_he(he, tol);
  if (const Check *bad = r.first_failure())
    throw PreconditionViolation("retract_perturb: " + bad->name + " fails at degree " + std::to_string(bad->degree));
  if (!equal(compose(i, p), identity<T>(M.module()), tol)) throw PreconditionViolation("retract_perturb: i p != 1");
  require_perturbation(M, delta, tol);
  HEData<T> out{L.with_differential(L.d() + compose(compose(p, delta), i)), M.with_differential(M.d() + delta), i, p,
                he.h};
  require_he(out, "retract_perturb", tol);
  return out;
}

} // namespace perturba
