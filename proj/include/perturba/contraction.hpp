#pragma once

#include <string>

#include "perturba/perturbation.hpp"

namespace perturba {

// Contractions here follow  b h + h b + 1 = 0.

template <Scalar T> GradedMap<T> contraction_residual(const Complex<T> &C, const GradedMap<T> &h) {
  return compose(C.d(), h) + compose(h, C.d()) + identity<T>(C.module());
}

template <Scalar T> bool is_contraction(const Complex<T> &C, const GradedMap<T> &h, const Tolerance &tol = {}) {
  if (h.shift() != -1) return false;
  return contraction_residual(C, h).is_zero(tol);
}

/// H = h (1 - delta h)^{-1}, a contraction of (M, b + delta).
template <Scalar T>
GradedMap<T> perturb_contraction(const Complex<T> &C, const GradedMap<T> &h, const GradedMap<T> &delta,
                                 const SmallnessCertificate<T> &cert, const Tolerance &tol = {}) {
  if (!is_contraction(C, h, tol)) throw NotContractible("perturb_contraction: b h + h b + 1 != 0");
  require_perturbation(C, delta, tol);
  auto H = compose(h, cert.inverse);
  if (!is_contraction(C.with_differential(C.d() + delta), H, tol))
    throw InvariantViolation("perturb_contraction: transferred contraction fails");
  return H;
}

template <Scalar T>
GradedMap<T> perturb_contraction(const Complex<T> &C, const GradedMap<T> &h, const GradedMap<T> &delta,
                                 const Tolerance &tol = {}) {
  if (!is_contraction(C, h, tol)) throw NotContractible("perturb_contraction: b h + h b + 1 != 0");
  return perturb_contraction(C, h, delta, certify_smallness(delta, h, tol), tol);
}

/// Contraction in a single degree k: lower : C^k -> C^{k-1},
/// upper : C^{k+1} -> C^k, with b_{k-1} lower + upper b_k + 1 = 0 on C^k.
template <Scalar T> struct DegreeContraction {
  int k = 0;
  Matrix<T> lower;
  Matrix<T> upper;

  Matrix<T> residual(const GradedMap<T> &d) const {
    return d.block(k - 1) * lower + upper * d.block(k) + Matrix<T>::identity(lower.cols());
  }
  bool holds(const GradedMap<T> &d, const Tolerance &tol = {}) const { return residual(d).is_zero(tol); }
};

/// From H^k = 0. With lambda a right inverse of b_k on its image, pi a left
/// inverse of im b_k in C^{k+1} and lambda' the same for b_{k-1}, the maps
/// lambda pi on C^{k+1} and lambda'(1 - lambda b) on C^k satisfy
/// b h + h b = 1; both are negated for the contraction convention. Reflexive
/// generalized inverses package lambda pi in one matrix.
template <Scalar T> DegreeContraction<T> build_contraction(const Complex<T> &C, int k, const Tolerance &tol = {}) {
  auto coh = cohomology_basis(C, k, tol);
  if (coh.dim != 0) throw CohomologyNonzero("H^" + std::to_string(k) + " has dimension " + std::to_string(coh.dim));
  const auto bk = C.d().block(k);
  const auto bk1 = C.d().block(k - 1);
  const auto g_hi = generalized_inverse(bk, tol);
  const auto g_lo = generalized_inverse(bk1, tol);
  const auto n = static_cast<std::size_t>(C.dim(k));
  DegreeContraction<T> out{k, -(g_lo * (Matrix<T>::identity(n) - g_hi * bk)), -g_hi};
  if (!out.holds(C.d(), tol)) throw InvariantViolation("build_contraction: identity fails at degree " + std::to_string(k));
  return out;
}

/// Contraction of an acyclic complex in every degree, built upward from the
/// bottom of the support: s^{k+1} = (1 - b s^k) G_k with G_k a generalized
/// inverse of b_k gives b s + s b = 1; the result is -s.
template <Scalar T> GradedMap<T> build_full_contraction(const Complex<T> &C, const Tolerance &tol = {}) {
  const auto &m = C.module();
  for (int k : m.support()) {
    auto coh = cohomology_basis(C, k, tol);
    if (coh.dim != 0)
      throw CohomologyNonzero("H^" + std::to_string(k) + " has dimension " + std::to_string(coh.dim));
  }
  GradedMap<T> s(m, m, -1);
  if (m.support().empty()) return s;
  const int lo = *m.support().begin(), hi = *m.support().rbegin();
  Matrix<T> sk(m.dim(lo - 1), m.dim(lo)); // s^lo = 0
  for (int k = lo; k <= hi; ++k) {
    const auto n = static_cast<std::size_t>(m.dim(k));
    const auto g = generalized_inverse(C.d().block(k), tol);
    Matrix<T> next = (Matrix<T>::identity(n) - C.d().block(k - 1) * sk) * g;
    s.set_block(k + 1, next);
    sk = std::move(next);
  }
  auto h = -s;
  if (!is_contraction(C, h, tol)) throw InvariantViolation("build_full_contraction: identity fails");
  return h;
}

/// Per-degree smallness: (1 - delta_{k-1} lower) on C^k and (1 - delta_k upper)
/// on C^{k+1}, both inverted.
template <Scalar T> struct DegreeSmallness {
  Matrix<T> inv_k;
  Matrix<T> inv_k1;
};

template <Scalar T>
DegreeSmallness<T> certify_degree_smallness(const DegreeContraction<T> &hc, const GradedMap<T> &delta,
                                            const Tolerance &tol = {}) {
  const int k = hc.k;
  auto try_inv = [&](const Matrix<T> &m) -> std::optional<Matrix<T>> {
    try {
      return inverse(m, tol);
    } catch (const NumericRankAmbiguity &) {
      return std::nullopt;
    }
  };
  const auto a = Matrix<T>::identity(hc.lower.cols()) - delta.block(k - 1) * hc.lower;
  const auto b = Matrix<T>::identity(hc.upper.cols()) - delta.block(k) * hc.upper;
  auto ia = try_inv(a);
  if (!ia) throw NotSmall("1 - delta h is not invertible on C^" + std::to_string(k));
  auto ib = try_inv(b);
  if (!ib) throw NotSmall("1 - delta h is not invertible on C^" + std::to_string(k + 1));
  return {*ia, *ib};
}

/// H = h (1 - delta h)^{-1} restricted to the two components; the identity is
/// checked on C^k.
template <Scalar T>
DegreeContraction<T> perturb_degree_contraction(const Complex<T> &C, const DegreeContraction<T> &hc,
                                                const GradedMap<T> &delta, const DegreeSmallness<T> &cert,
                                                const Tolerance &tol = {}) {
  if (!hc.holds(C.d(), tol)) throw NotContractible("perturb_degree_contraction: input is not a contraction in degree " + std::to_string(hc.k));
  DegreeContraction<T> out{hc.k, hc.lower * cert.inv_k, hc.upper * cert.inv_k1};
  if (!out.holds(C.d() + delta, tol))
    throw InvariantViolation("perturb_degree_contraction: identity fails at degree " + std::to_string(hc.k));
  return out;
}

template <Scalar T>
DegreeContraction<T> perturb_degree_contraction(const Complex<T> &C, const DegreeContraction<T> &hc,
                                                const GradedMap<T> &delta, const Tolerance &tol = {}) {
  return perturb_degree_contraction(C, hc, delta, certify_degree_smallness(hc, delta, tol), tol);
}

} // namespace perturba
