#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "perturba/analytic.hpp"
#include "perturba/ode.hpp"

namespace perturba {

/// Everything the ODE scheme needs from a deformation problem. The base
/// complex carries the differential at t = 0 in degrees 1 -> 2 -> 3, and the
/// degree-2 contraction is for that differential.
struct TrivializationProblem {
  std::size_t n = 0; ///< dimension of the algebra; C^1 = n x n matrices
  Complex<double> base;
  DegreeContraction<double> contraction;
  std::function<GradedMap<double>(double)> delta_at; ///< d_t - d_0
  std::function<RealVector(double)> cocycle_at;      ///< c_t in C^2
  std::function<double(double, const Matrix<double> &)> defect;
};

struct TrivializationOptions {
  double t_max = 0.5;
  int steps = 100;
  double tau_triv = 1e-6;
  double tau_sign = 1e-8;
  Tolerance tol{1e-9};
  /// false skips the contraction identity and transgression residual checks,
  /// so a path with no valid contraction runs to the defect test.
  bool strict = true;
};

struct TrivializationResult {
  std::vector<double> grid;
  std::vector<Matrix<double>> h;
  std::vector<double> defects;
  std::vector<double> condition;
  int sign = 0; ///< a_t = sign * H_t(c_t)
  double max_defect() const {
    double m = 0.0;
    for (double d : defects) m = std::max(m, d);
    return m;
  }
};

/// C^1 coordinates (input * n + output) as the matrix of the linear map.
inline Matrix<double> cochain1_matrix(const RealVector &a, std::size_t n) {
  Matrix<double> m(n, n);
  for (std::size_t in = 0; in < n; ++in)
    for (std::size_t out = 0; out < n; ++out) m(out, in) = a[in * n + out];
  return m;
}

inline double sup_condition_number(const Matrix<double> &m) {
  auto inv = inverse(m, Tolerance{1e-14});
  if (!inv) return INFINITY;
  return sup_operator_norm(m) * sup_operator_norm(*inv);
}

/// Largest t in [0, t_bad] (by bisection) at which 1 - delta_t h is
/// certified invertible on C^2 and C^3.
inline double smallness_radius(const TrivializationProblem &pb, double t_bad, const Tolerance &tol = {},
                               int iterations = 40) {
  double lo = 0.0, hi = t_bad;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    try {
      certify_degree_smallness(pb.contraction, pb.delta_at(mid), tol);
      lo = mid;
    } catch (const NotSmall &) {
      hi = mid;
    }
  }
  return lo;
}

/// Perturbed degree-2 contraction at t; NotSmall carries the radius.
inline DegreeContraction<double> contraction_at(const TrivializationProblem &pb, double t, const Tolerance &tol = {},
                                                bool strict = true) {
  const auto delta = pb.delta_at(t);
  try {
    const auto cert = certify_degree_smallness(pb.contraction, delta, tol);
    if (!strict) return {pb.contraction.k, pb.contraction.lower * cert.inv_k, pb.contraction.upper * cert.inv_k1};
    return perturb_degree_contraction(pb.base, pb.contraction, delta, cert, tol);
  } catch (const NotSmall &e) {
    const double r = smallness_radius(pb, t, tol);
    throw NotSmall("1 - delta_t h singular at t = " + std::to_string(t) + "; certified up to |t| = " +
                       std::to_string(r),
                   r);
  }
}

/// Solves d_t a = c_t through the perturbed contraction. H_t satisfies
/// d H + H d + 1 = 0, so a = -H_t(c_t) is expected; both signs are tried and
/// the one with vanishing residual is kept.
inline RealVector transgress_cocycle(const TrivializationProblem &pb, double t, int &sign, const TrivializationOptions &opt) {
  const auto H = contraction_at(pb, t, opt.tol, opt.strict);
  const auto c = pb.cocycle_at(t);
  const auto delta = pb.delta_at(t);
  const auto d1 = pb.base.d().block(1) + delta.block(1);
  const auto cand = H.lower * c;
  const double scale = std::max(1.0, sup_norm(c));
  double best = INFINITY;
  int best_sign = 0;
  for (int s : {-1, 1}) {
    RealVector a = cand;
    for (auto &x : a) x *= s;
    const double r = sup_norm(d1 * a - c);
    if (r < best) {
      best = r;
      best_sign = s;
    }
  }
  if (opt.strict && best > opt.tau_sign * scale)
    throw ToleranceMiss("transgression residual " + std::to_string(best) + " at t = " + std::to_string(t));
  if (sign != 0 && sign != best_sign && sup_norm(c) > opt.tau_sign)
    throw InvariantViolation("transgression sign changed along the path");
  if (sup_norm(c) > opt.tau_sign) sign = best_sign;
  RealVector a = cand;
  for (auto &x : a) x *= best_sign;
  return a;
}

/// Integrates dh/dt = h a_t, h_0 = 1, with RK4 and checks the defect at each
/// grid point.
inline TrivializationResult trivialize_path(const TrivializationProblem &pb, const TrivializationOptions &opt = {}) {
  if (opt.steps <= 0) throw PreconditionViolation("trivialize: steps must be positive");
  TrivializationResult res;
  const double dt = opt.t_max / opt.steps;
  auto rhs = [&](double t, const Matrix<double> &h) {
    return h * cochain1_matrix(transgress_cocycle(pb, t, res.sign, opt), pb.n);
  };
  auto h = Matrix<double>::identity(pb.n);
  for (int s = 0; s <= opt.steps; ++s) {
    const double t = s * dt;
    if (s > 0) h = rk4_step(rhs, t - dt, h, dt);
    res.grid.push_back(t);
    res.h.push_back(h);
    res.defects.push_back(pb.defect(t, h));
    res.condition.push_back(sup_condition_number(h));
  }
  if (res.sign == 0) res.sign = -1;
  if (res.max_defect() > opt.tau_triv)
    throw DefectExceeded("max defect " + std::to_string(res.max_defect()) + " exceeds " + std::to_string(opt.tau_triv),
                         res.grid, res.defects);
  return res;
}

} // namespace perturba
