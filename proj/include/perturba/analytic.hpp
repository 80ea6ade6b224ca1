#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "perturba/contraction.hpp"
#include "perturba/random.hpp"

namespace perturba {

using RealVector = std::vector<double>;
using NonlinearMap = std::function<RealVector(const RealVector &)>;

enum class NormKind { Sup, Euclidean };

inline double norm(const RealVector &v, NormKind kind) {
  return kind == NormKind::Sup ? sup_norm(v) : euclidean_norm(v);
}

/// A degree-k contraction by (possibly nonlinear) odd maps:
/// h_low : C^k -> C^{k-1}, h_high : C^{k+1} -> C^k, with recorded constants
///   |h_low(v)| <= C_h |v| on C^k,  |h_high(y)| <= C_lambda |y| on im b_k.
struct NormedDegree {
  int k = 0;
  NormKind norm = NormKind::Sup;
  std::size_t dim_below = 0, dim = 0, dim_above = 0;
  NonlinearMap h_low;
  NonlinearMap h_high;
  Matrix<double> b_k; ///< used to sample im b_k when probing
  double C_h = 0.0;
  double C_lambda = 0.0;
};

inline std::vector<RealVector> probe_vectors(std::size_t n, Rng &rng, int samples = 1000) {
  std::vector<RealVector> out;
  for (int s = 0; s < samples; ++s) {
    RealVector v(n);
    for (auto &x : v) x = rng.uniform();
    out.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    RealVector e(n, 0.0);
    e[i] = 1.0;
    out.push_back(std::move(e));
  }
  // Vertices of the unit cube attain the sup-norm operator norm of linear maps.
  if (n <= 12)
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      RealVector v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      out.push_back(std::move(v));
    }
  return out;
}

inline double estimate_constant(const NonlinearMap &f, const std::vector<RealVector> &probes, NormKind kind) {
  double c = 0.0;
  for (const auto &v : probes) {
    const double nv = norm(v, kind);
    if (nv < 1e-12) continue;
    c = std::max(c, norm(f(v), kind) / nv);
  }
  return c;
}

constexpr double kConstantInflation = 1.1;

/// Probe-estimates C_h and C_lambda in nd.norm and inflates them by 10%.
inline void estimate_constants(NormedDegree &nd, Rng &rng, int samples = 1000) {
  nd.C_h = kConstantInflation * estimate_constant(nd.h_low, probe_vectors(nd.dim, rng, samples), nd.norm);
  std::vector<RealVector> image;
  for (const auto &x : probe_vectors(nd.dim, rng, samples)) image.push_back(nd.b_k * x);
  nd.C_lambda = kConstantInflation * estimate_constant(nd.h_high, image, nd.norm);
}

/// True iff f(-v) == -f(v) bit for bit on every probe.
inline bool is_odd(const NonlinearMap &f, std::size_t n, Rng &rng, int samples = 200) {
  for (const auto &v : probe_vectors(n, rng, samples)) {
    RealVector neg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    auto a = f(v), b = f(neg);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (b[i] != -a[i]) return false;
  }
  return true;
}

/// v -> (f(v) - f(-v)) / 2.
inline NonlinearMap oddify(NonlinearMap f) {
  return [f = std::move(f)](const RealVector &v) {
    RealVector neg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    auto a = f(v), b = f(neg);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] - b[i]);
    return a;
  };
}

inline NonlinearMap linear_map(Matrix<double> m) {
  return [m = std::move(m)](const RealVector &v) { return m * v; };
}

/// Linear contraction from build_contraction, constants probe-estimated.
inline NormedDegree linear_normed_degree(const Complex<double> &C, int k, Rng &rng, NormKind kind = NormKind::Sup,
                                         const Tolerance &tol = {}) {
  auto hc = build_contraction(C, k, tol);
  NormedDegree nd;
  nd.k = k;
  nd.norm = kind;
  nd.dim_below = static_cast<std::size_t>(C.dim(k - 1));
  nd.dim = static_cast<std::size_t>(C.dim(k));
  nd.dim_above = static_cast<std::size_t>(C.dim(k + 1));
  nd.h_low = linear_map(hc.lower);
  nd.h_high = linear_map(hc.upper);
  nd.b_k = C.d().block(k);
  estimate_constants(nd, rng);
  return nd;
}

/// Nonlinear odd contraction. With G_j reflexive generalized inverses of b_j,
///   lambda0(y) = G_k y + kappa (|<a,y>| + amp sin<c,y>)    (kappa in ker b_k),
///   lambda = oddify(lambda0), still a right inverse of b_k on im b_k,
///   h_high = -lambda(b_k G_k y),  h_low = -G_{k-1}(v - lambda(b_k v)).
/// With kappa = 0 this is the linear contraction of build_contraction.
inline NormedDegree nonlinear_normed_degree(const Complex<double> &C, int k, Rng &rng, double amp = 0.5,
                                            NormKind kind = NormKind::Sup, const Tolerance &tol = {}) {
  if (cohomology_basis(C, k, tol).dim != 0) throw CohomologyNonzero("nonlinear_normed_degree: H^k != 0");
  const auto bk = C.d().block(k);
  const auto gk = generalized_inverse(bk, tol);
  const auto gk1 = generalized_inverse(C.d().block(k - 1), tol);
  const auto ker = kernel_basis(bk, tol);
  const std::size_t n = bk.cols(), m = bk.rows();
  RealVector kappa(n, 0.0), a(m), c(m);
  for (std::size_t j = 0; j < ker.cols(); ++j) {
    const double w = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) kappa[i] += w * ker(i, j);
  }
  for (auto &x : a) x = rng.uniform();
  for (auto &x : c) x = rng.uniform();
  NonlinearMap lambda0 = [=](const RealVector &y) {
    auto out = gk * y;
    double ay = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      ay += a[i] * y[i];
      cy += c[i] * y[i];
    }
    const double s = std::fabs(ay) + amp * std::sin(cy);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * kappa[i];
    return out;
  };
  auto lambda = oddify(lambda0);
  const auto proj = bk * gk;
  NormedDegree nd;
  nd.k = k;
  nd.norm = kind;
  nd.dim_below = gk1.rows();
  nd.dim = n;
  nd.dim_above = m;
  nd.h_high = [=](const RealVector &y) {
    auto out = lambda(proj * y);
    for (auto &x : out) x = -x;
    return out;
  };
  nd.h_low = [=](const RealVector &v) {
    auto out = gk1 * (v - lambda(bk * v));
    for (auto &x : out) x = -x;
    return out;
  };
  nd.b_k = bk;
  estimate_constants(nd, rng);
  return nd;
}

/// (1 - margin) / (C_h + C_lambda).
inline double banach_epsilon(const NormedDegree &nd, double margin = 0.01) {
  return (1.0 - margin) / (nd.C_h + nd.C_lambda);
}

/// delta = g b g^{-1} - b with g = 1 + sN, N uniform in [-1,1]; s is halved
/// until |delta| < bound (sup operator norm) on C^{k-1} and C^k.
inline GradedMap<double> bounded_conjugation_perturbation(Rng &rng, const Complex<double> &C, int k, double bound) {
  const auto &mod = C.module();
  std::map<int, Matrix<double>> noise;
  for (auto [deg, n] : mod.dims()) {
    Matrix<double> m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rng.uniform();
    noise[deg] = m;
  }
  for (double s = 1.0; s > 1e-8; s *= 0.5) {
    GradedMap<double> g(mod, mod, 0), ginv(mod, mod, 0);
    bool ok = true;
    for (auto [deg, n] : mod.dims()) {
      auto gk = Matrix<double>::identity(n) + s * noise[deg];
      auto inv = inverse(gk);
      if (!inv) {
        ok = false;
        break;
      }
      g.set_block(deg, gk);
      ginv.set_block(deg, *inv);
    }
    if (!ok) continue;
    auto delta = compose(compose(g, C.d()), ginv) - C.d();
    if (sup_operator_norm(delta.block(k - 1)) < bound && sup_operator_norm(delta.block(k)) < bound) return delta;
  }
  throw InvariantViolation("bounded_conjugation_perturbation: no admissible scale");
}

struct SeriesOptions {
  double tau_series = 1e-12;
  double tau_accept = 1e-8;
  int window = 10;
  int max_iterations = 10000;
};

struct SeriesResult {
  RealVector w;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> term_norms;
};

/// w = -sum_n h([delta, h]^n v) for v in ker(b + delta) in C^k, with
/// [delta, h] = delta h + h delta; (b + delta) w = v.
inline SeriesResult transgress_series(const NormedDegree &nd, const GradedMap<double> &b, const GradedMap<double> &delta,
                                      const RealVector &v, const SeriesOptions &opt = {}) {
  const int k = nd.k;
  if (v.size() != nd.dim) throw ShapeMismatch("transgress_series: v has wrong length");
  const auto bd_k = b.block(k) + delta.block(k);
  const auto bd_km1 = b.block(k - 1) + delta.block(k - 1);
  const auto d_km1 = delta.block(k - 1), d_k = delta.block(k);
  const double vnorm = std::max(1.0, norm(v, nd.norm));
  if (norm(bd_k * v, nd.norm) > opt.tau_accept * vnorm)
    throw PreconditionViolation("transgress_series: (b + delta) v != 0");

  SeriesResult res;
  RealVector vn = v;
  RealVector w(nd.dim_below, 0.0);
  res.term_norms.push_back(norm(vn, nd.norm));
  for (int n = 0;; ++n) {
    if (n >= opt.max_iterations) throw Divergence("transgress_series: no convergence in " + std::to_string(n) + " terms");
    const auto hv = nd.h_low(vn);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= hv[i];
    RealVector next = d_km1 * hv + nd.h_high(d_k * vn);
    const double nn = norm(next, nd.norm);
    if (!std::isfinite(nn)) throw Divergence("transgress_series: non-finite term at n = " + std::to_string(n + 1));
    if (norm(bd_k * next, nd.norm) > opt.tau_accept * std::max(1.0, nn))
      throw InvariantViolation("transgress_series: [delta, h] left ker(b + delta) at n = " + std::to_string(n + 1));
    res.term_norms.push_back(nn);
    vn = std::move(next);
    res.iterations = n + 1;
    if (nn < opt.tau_series * vnorm) break;
    const auto sz = res.term_norms.size();
    if (sz > static_cast<std::size_t>(opt.window) && nn >= res.term_norms[sz - 1 - opt.window])
      throw Divergence("transgress_series: term norms did not decrease over " + std::to_string(opt.window) +
                       " iterations (|v_n| = " + std::to_string(nn) + ")");
  }
  res.residual = norm(bd_km1 * w - v, nd.norm);
  res.w = std::move(w);
  if (res.residual > opt.tau_accept * vnorm)
    throw ToleranceMiss("transgress_series: residual " + std::to_string(res.residual));
  return res;
}

} // namespace perturba
