#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "perturba/trivialize.hpp"

namespace perturba {

/// Structure constants: [e_i, e_j] = sum_k c[(k n + i) n + j] e_k.
template <Scalar T> struct LieAlgebra {
  std::size_t n = 0;
  std::vector<T> c;

  LieAlgebra() = default;
  LieAlgebra(std::size_t dim, std::vector<T> constants) : n(dim), c(std::move(constants)) {
    if (c.size() != n * n * n) throw ShapeMismatch("Lie algebra: expected n^3 structure constants");
  }
  static LieAlgebra zero(std::size_t dim) { return LieAlgebra(dim, std::vector<T>(dim * dim * dim, T(0))); }

  const T &at(std::size_t k, std::size_t i, std::size_t j) const { return c[(k * n + i) * n + j]; }
  T &at(std::size_t k, std::size_t i, std::size_t j) { return c[(k * n + i) * n + j]; }

  Vector<T> bracket(const Vector<T> &v, const Vector<T> &w) const {
    Vector<T> out(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == T(0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (w[j] == T(0)) continue;
        const T vw = v[i] * w[j];
        for (std::size_t k = 0; k < n; ++k) out[k] += at(k, i, j) * vw;
      }
    }
    return out;
  }

  template <Scalar U> LieAlgebra<U> cast() const {
    std::vector<U> d(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) d[i] = scalar_cast<U>(c[i]);
    return LieAlgebra<U>(n, d);
  }

  LieAlgebra operator+(const LieAlgebra &o) const {
    LieAlgebra r = *this;
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += o.c[i];
    return r;
  }
  LieAlgebra operator-(const LieAlgebra &o) const {
    LieAlgebra r = *this;
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] -= o.c[i];
    return r;
  }
  friend LieAlgebra operator*(const T &s, LieAlgebra a) {
    for (auto &x : a.c) x *= s;
    return a;
  }
};

template <Scalar T> bool is_antisymmetric(const LieAlgebra<T> &g, const Tolerance &tol = {}) {
  for (std::size_t k = 0; k < g.n; ++k)
    for (std::size_t i = 0; i < g.n; ++i)
      for (std::size_t j = 0; j < g.n; ++j)
        if (!approx_equal(g.at(k, i, j), -g.at(k, j, i), tol)) return false;
  return true;
}

/// Sum over cyclic permutations of c1(c2(x, y), z) on basis triples; J(c) is
/// jacobiator(c, c).
template <Scalar T> std::vector<T> jacobiator(const LieAlgebra<T> &c1, const LieAlgebra<T> &c2) {
  const auto n = c1.n;
  std::vector<T> out(n * n * n * n, T(0));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        const std::size_t t[3] = {x, y, z};
        for (int r = 0; r < 3; ++r) {
          const auto a = t[r], b = t[(r + 1) % 3], cc = t[(r + 2) % 3];
          for (std::size_t m = 0; m < n; ++m) {
            const T inner = c2.at(m, a, b);
            if (inner == T(0)) continue;
            for (std::size_t k = 0; k < n; ++k) out[((x * n + y) * n + z) * n + k] += c1.at(k, m, cc) * inner;
          }
        }
      }
  return out;
}

template <Scalar T> bool satisfies_jacobi(const LieAlgebra<T> &g, const Tolerance &tol = {}) {
  for (const auto &v : jacobiator(g, g))
    if (!is_zero(v, tol)) return false;
  return true;
}

template <Scalar T> void require_lie(const LieAlgebra<T> &g, const Tolerance &tol = {}) {
  if (!is_antisymmetric(g, tol)) throw AxiomViolation("bracket is not antisymmetric");
  if (!satisfies_jacobi(g, tol)) throw AxiomViolation("Jacobi identity fails");
}

namespace detail {
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}
} // namespace detail

/// Coordinates of C^k: sorted k-subsets (lexicographic) times output index.
struct CELayout {
  std::size_t n = 0;
  std::vector<std::vector<std::vector<std::size_t>>> subsets; ///< per degree
  std::vector<std::map<std::vector<std::size_t>, std::size_t>> index;

  explicit CELayout(std::size_t dim) : n(dim) {
    for (std::size_t k = 0; k <= n; ++k) {
      subsets.push_back(detail::subsets(n, k));
      std::map<std::vector<std::size_t>, std::size_t> idx;
      for (std::size_t s = 0; s < subsets.back().size(); ++s) idx[subsets.back()[s]] = s;
      index.push_back(std::move(idx));
    }
  }
  std::size_t dim(std::size_t k) const { return k <= n ? subsets[k].size() * n : 0; }
};

/// Matrix of the Chevalley-Eilenberg differential C^k -> C^{k+1} for the
/// bracket c (linear in c; c need not satisfy Jacobi):
///   (dw)(x_0..x_k) = sum_i (-1)^i [x_i, w(..^x_i..)]
///                  + sum_{i<j} (-1)^{i+j} w([x_i, x_j], ..^x_i..^x_j..).
template <Scalar T> Matrix<T> ce_differential(const LieAlgebra<T> &g, const CELayout &lay, std::size_t k) {
  const auto n = g.n;
  Matrix<T> d(lay.dim(k + 1), lay.dim(k));
  if (k + 1 > n) return d;
  for (std::size_t row_s = 0; row_s < lay.subsets[k + 1].size(); ++row_s) {
    const auto &tset = lay.subsets[k + 1][row_s];
    // First sum: remove t_i, the rest is already sorted.
    for (std::size_t i = 0; i <= k; ++i) {
      std::vector<std::size_t> rest;
      for (std::size_t r = 0; r <= k; ++r)
        if (r != i) rest.push_back(tset[r]);
      const auto col_s = lay.index[k].at(rest);
      const T sign = i % 2 == 0 ? T(1) : T(-1);
      for (std::size_t o = 0; o < n; ++o)
        for (std::size_t m = 0; m < n; ++m) {
          const T cm = g.at(m, tset[i], o);
          if (cm == T(0)) continue;
          d(row_s * n + m, col_s * n + o) += sign * cm;
        }
    }
    // Second sum: w([x_i, x_j], rest) with rest sorted, m inserted.
    for (std::size_t i = 0; i <= k; ++i)
      for (std::size_t j = i + 1; j <= k; ++j) {
        std::vector<std::size_t> rest;
        for (std::size_t r = 0; r <= k; ++r)
          if (r != i && r != j) rest.push_back(tset[r]);
        const T sij = (i + j) % 2 == 0 ? T(1) : T(-1);
        for (std::size_t m = 0; m < n; ++m) {
          const T cm = g.at(m, tset[i], tset[j]);
          if (cm == T(0)) continue;
          if (std::find(rest.begin(), rest.end(), m) != rest.end()) continue;
          std::size_t pos = 0;
          while (pos < rest.size() && rest[pos] < m) ++pos;
          auto args = rest;
          args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), m);
          const auto col_s = lay.index[k].at(args);
          const T sp = pos % 2 == 0 ? T(1) : T(-1);
          for (std::size_t o = 0; o < n; ++o) d(row_s * n + o, col_s * n + o) += sij * sp * cm;
        }
      }
  }
  return d;
}

/// All differentials as a graded map on the CE module (degrees 0..n).
template <Scalar T> GradedMap<T> ce_differential_map(const LieAlgebra<T> &g, const CELayout &lay) {
  GradedModule m;
  for (std::size_t k = 0; k <= g.n; ++k) m.set_dim(static_cast<int>(k), static_cast<int>(lay.dim(k)));
  GradedMap<T> d(m, m, 1);
  for (std::size_t k = 0; k < g.n; ++k) d.set_block(static_cast<int>(k), ce_differential(g, lay, k));
  return d;
}

template <Scalar T> Complex<T> ce_complex(const LieAlgebra<T> &g, const Tolerance &tol = {}) {
  require_lie(g, tol);
  CELayout lay(g.n);
  auto d = ce_differential_map(g, lay);
  Complex<T> c(d.source(), d);
  if (!is_complex(c, tol)) throw InvariantViolation("Chevalley-Eilenberg d^2 != 0");
  return c;
}

template <Scalar T> bool h2_vanishes(const LieAlgebra<T> &g, const Tolerance &tol = {}) {
  return cohomology_basis(ce_complex(g, tol), 2, tol).dim == 0;
}

/// Bracket tensor <-> C^2 coordinates.
template <Scalar T> Vector<T> to_cochain2(const LieAlgebra<T> &b, const CELayout &lay) {
  Vector<T> v(lay.dim(2), T(0));
  for (std::size_t s = 0; s < lay.subsets[2].size(); ++s)
    for (std::size_t k = 0; k < b.n; ++k) v[s * b.n + k] = b.at(k, lay.subsets[2][s][0], lay.subsets[2][s][1]);
  return v;
}

template <Scalar T> LieAlgebra<T> from_cochain2(const Vector<T> &v, const CELayout &lay) {
  auto b = LieAlgebra<T>::zero(lay.n);
  for (std::size_t s = 0; s < lay.subsets[2].size(); ++s)
    for (std::size_t k = 0; k < lay.n; ++k) {
      const auto i = lay.subsets[2][s][0], j = lay.subsets[2][s][1];
      b.at(k, i, j) = v[s * lay.n + k];
      b.at(k, j, i) = -v[s * lay.n + k];
    }
  return b;
}

/// Jacobiator restricted to sorted triples: C^3 coordinates of J(c).
template <Scalar T> Vector<T> jacobi_map(const LieAlgebra<T> &c, const CELayout &lay) {
  if (!is_antisymmetric(c)) throw PreconditionViolation("jacobi_map: cochain is not antisymmetric");
  const auto j = jacobiator(c, c);
  const auto n = c.n;
  Vector<T> v(lay.dim(3), T(0));
  for (std::size_t s = 0; s < lay.subsets[3].size(); ++s) {
    const auto &t = lay.subsets[3][s];
    for (std::size_t k = 0; k < n; ++k) v[s * n + k] = j[((t[0] * n + t[1]) * n + t[2]) * n + k];
  }
  return v;
}

/// C(phi)(v, w) = phi^{-1} [phi v, phi w].
template <Scalar T> LieAlgebra<T> conjugation_map(const LieAlgebra<T> &g, const Matrix<T> &phi, const Tolerance &tol = {}) {
  if (phi.rows() != g.n || phi.cols() != g.n) throw ShapeMismatch("conjugation_map: phi must be n x n");
  auto inv = inverse(phi, tol);
  if (!inv) throw Singular("conjugation_map: phi is not invertible");
  auto out = LieAlgebra<T>::zero(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      auto b = *inv * g.bracket(phi.column(i), phi.column(j));
      for (std::size_t k = 0; k < g.n; ++k) out.at(k, i, j) = b[k];
    }
  return out;
}

/// Central-difference check of a derivative against a linear map, at a step
/// and at half of it. Below `floor` the error is rounding noise and no
/// further reduction is expected.
struct FiniteDifferenceCheck {
  std::string name;
  double step = 0.0;
  double error = 0.0;
  double error_half = 0.0;
  double floor = 0.0;
  double reduction() const { return error_half > 0.0 ? error / error_half : INFINITY; }
  bool ok(double tol = 1e-6) const {
    return error <= tol && error_half <= tol && (error_half <= floor || reduction() >= 3.0);
  }
};

namespace detail {
template <class F>
FiniteDifferenceCheck central_difference(std::string name, F &&f, const Matrix<double> &lin, double step) {
  FiniteDifferenceCheck out{std::move(name), step, 0.0, 0.0, 0.0};
  double scale = 1.0;
  auto err = [&](double s) {
    double e = 0.0;
    for (std::size_t m = 0; m < lin.cols(); ++m) {
      const auto fp = f(m, s), fm = f(m, -s);
      scale = std::max({scale, sup_norm(fp), sup_norm(fm)});
      auto fd = fp - fm;
      for (auto &x : fd) x /= 2.0 * s;
      e = std::max(e, sup_norm(fd - lin.column(m)));
    }
    return e;
  };
  out.error = err(step);
  out.error_half = err(step / 2.0);
  out.floor = 1e3 * 2.2e-16 * scale / (step / 2.0);
  return out;
}
} // namespace detail

/// dC at phi = 1 against d on C^1, and dJ at the bracket against -d on C^2,
/// over all coordinate directions.
inline std::vector<FiniteDifferenceCheck> lie_finite_differences(const LieAlgebra<double> &g, double step = 1e-4) {
  CELayout lay(g.n);
  const auto d1 = ce_differential(g, lay, 1), d2 = ce_differential(g, lay, 2);
  auto dC = [&](std::size_t m, double s) {
    RealVector a(lay.dim(1), 0.0);
    a[m] = s;
    return to_cochain2(conjugation_map(g, Matrix<double>::identity(g.n) + cochain1_matrix(a, g.n), Tolerance{1e-14}), lay);
  };
  auto dJ = [&](std::size_t m, double s) {
    RealVector v = to_cochain2(g, lay);
    v[m] += s;
    return jacobi_map(from_cochain2(v, lay), lay);
  };
  return {detail::central_difference("dC at 1 = d on C^1", dC, d1, step),
          detail::central_difference("dJ at bracket = -d on C^2", dJ, -d2, step)};
}

/// Polynomial family bracket_t = sum_r B_r t^r.
template <Scalar T> struct BracketFamily {
  std::vector<LieAlgebra<T>> coeffs;
  double t_min = 0.0, t_max = 1.0;

  std::size_t n() const { return coeffs.empty() ? 0 : coeffs.front().n; }
  LieAlgebra<T> at(const T &t) const {
    auto out = LieAlgebra<T>::zero(n());
    T power(1);
    for (const auto &b : coeffs) {
      out = out + power * b;
      power *= t;
    }
    return out;
  }
  /// d/dt bracket_t = sum_r r B_r t^{r-1}.
  LieAlgebra<T> derivative(const T &t) const {
    auto out = LieAlgebra<T>::zero(n());
    T power(1);
    for (std::size_t r = 1; r < coeffs.size(); ++r) {
      out = out + (T(static_cast<long>(r)) * power) * coeffs[r];
      power *= t;
    }
    return out;
  }
  template <Scalar U> BracketFamily<U> cast() const {
    BracketFamily<U> f;
    for (const auto &b : coeffs) f.coeffs.push_back(b.template cast<U>());
    f.t_min = t_min;
    f.t_max = t_max;
    return f;
  }

  /// Antisymmetry of each coefficient and Jacobi as a polynomial identity.
  void validate(const Tolerance &tol = {}) const {
    if (coeffs.empty()) throw SchemaError("bracket family has no coefficients");
    for (const auto &b : coeffs) {
      if (b.n != n()) throw ShapeMismatch("bracket family: coefficient dimensions differ");
      if (!is_antisymmetric(b, tol)) throw AxiomViolation("bracket family: coefficient not antisymmetric");
    }
    const auto deg = coeffs.size() - 1;
    for (std::size_t d = 0; d <= 2 * deg; ++d) {
      std::vector<T> sum(n() * n() * n() * n(), T(0));
      for (std::size_t r = 0; r <= std::min(d, deg); ++r) {
        if (d - r > deg) continue;
        auto j = jacobiator(coeffs[r], coeffs[d - r]);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += j[i];
      }
      for (const auto &v : sum)
        if (!is_zero(v, tol)) throw AxiomViolation("bracket family: Jacobi fails at order t^" + std::to_string(d));
    }
  }
};

/// c_t = d/dt bracket_t as a 2-cochain, checked closed for d_{bracket_t}.
template <Scalar T>
Vector<T> deformation_cocycle(const BracketFamily<T> &fam, const T &t, const Tolerance &tol = {}) {
  CELayout lay(fam.n());
  auto c = to_cochain2(fam.derivative(t), lay);
  const auto d2 = ce_differential(fam.at(t), lay, 2);
  if (!is_zero_vector(d2 * c, tol)) throw NotClosed("deformation cocycle is not closed");
  return c;
}

/// delta_t = d(bracket_t) - d(bracket_0) in degrees 1 and 2. The CE
/// differential is linear in the bracket, so this is d of the difference.
template <Scalar T> GradedMap<T> ce_perturbation(const BracketFamily<T> &fam, const T &t, const Complex<T> &base) {
  CELayout lay(fam.n());
  const auto diff = fam.at(t) - fam.coeffs.front();
  GradedMap<T> delta(base.module(), base.module(), 1);
  for (std::size_t k = 0; k < fam.n(); ++k) delta.set_block(static_cast<int>(k), ce_differential(diff, lay, k));
  return delta;
}

/// H_t from the degree-2 contraction of the base complex. On failure the
/// NotSmall carries the largest |t'| <= |t| (bisection) that still certifies.
template <Scalar T>
DegreeContraction<T> perturbed_contraction_at(const BracketFamily<T> &fam, const T &t, const Complex<T> &base,
                                              const DegreeContraction<T> &hc, const Tolerance &tol = {}) {
  const auto delta = ce_perturbation(fam, t, base);
  try {
    return perturb_degree_contraction(base, hc, delta, certify_degree_smallness(hc, delta, tol), tol);
  } catch (const NotSmall &) {
    const double tb = to_double(t);
    double lo = 0.0, hi = tb;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      try {
        certify_degree_smallness(hc, ce_perturbation(fam, ScalarTraits<T>::from_double(mid), base), tol);
        lo = mid;
      } catch (const NotSmall &) {
        hi = mid;
      }
    }
    throw NotSmall("1 - delta_t h singular at t = " + std::to_string(tb) + "; certified up to |t| = " +
                       std::to_string(std::fabs(lo)),
                   std::fabs(lo));
  }
}

/// Defect max_{i,j} |[h e_i, h e_j]_0 - h [e_i, e_j]_t|.
inline double lie_defect(const LieAlgebra<double> &g0, const LieAlgebra<double> &gt, const Matrix<double> &h) {
  double m = 0.0;
  for (std::size_t i = 0; i < g0.n; ++i)
    for (std::size_t j = 0; j < g0.n; ++j) {
      Vector<double> ei(g0.n, 0.0), ej(g0.n, 0.0);
      ei[i] = 1.0;
      ej[j] = 1.0;
      const auto lhs = g0.bracket(h * ei, h * ej);
      const auto rhs = h * gt.bracket(ei, ej);
      m = std::max(m, sup_norm(lhs - rhs));
    }
  return m;
}

/// Problem data for the shared ODE engine; exact structure constants are
/// converted to Float64 here.
template <Scalar T>
TrivializationProblem lie_problem(const BracketFamily<T> &fam_in, const Tolerance &exact_tol = {}) {
  fam_in.validate(exact_tol);
  const auto g0 = fam_in.coeffs.front();
  if (!h2_vanishes(g0, exact_tol)) throw CohomologyNonzero("H^2(g; g) != 0");
  const auto fam = fam_in.template cast<double>();
  const auto g0d = g0.template cast<double>();
  Tolerance ftol{1e-9};
  TrivializationProblem pb;
  pb.n = g0.n;
  pb.base = ce_complex(g0d, ftol);
  const auto hc = build_contraction(ce_complex(g0, exact_tol), 2, exact_tol);
  pb.contraction = {2, hc.lower.template cast<double>(), hc.upper.template cast<double>()};
  pb.delta_at = [fam, base = pb.base](double t) { return ce_perturbation(fam, t, base); };
  pb.cocycle_at = [fam](double t) { return deformation_cocycle(fam, t, Tolerance{1e-8}); };
  pb.defect = [fam, g0d](double t, const Matrix<double> &h) { return lie_defect(g0d, fam.at(t), h); };
  return pb;
}

template <Scalar T>
TrivializationResult trivialize(const BracketFamily<T> &fam, const TrivializationOptions &opt = {},
                                const Tolerance &exact_tol = {}) {
  return trivialize_path(lie_problem(fam, exact_tol), opt);
}

/// Chord-Newton for C(phi) = m': with r = m' - C(phi) and the frozen base
/// contraction, phi <- phi (1 - h(r)).
struct NewtonOptions {
  double tau = 1e-10;
  int max_iter = 50;
};

struct NewtonResult {
  Matrix<double> phi;
  int iterations = 0;
  double residual = 0.0;
};

template <Scalar T>
NewtonResult conjugate_nearby_bracket(const LieAlgebra<T> &g_exact, const LieAlgebra<double> &target,
                                      const NewtonOptions &opt = {}, const Tolerance &exact_tol = {}) {
  if (!h2_vanishes(g_exact, exact_tol)) throw CohomologyNonzero("H^2(g; g) != 0");
  if (!is_antisymmetric(target, Tolerance{1e-12}) || !satisfies_jacobi(target, Tolerance{1e-9}))
    throw PreconditionViolation("conjugate_nearby_bracket: target is not a Lie bracket");
  const auto g = g_exact.template cast<double>();
  CELayout lay(g.n);
  const auto hc = build_contraction(ce_complex(g_exact, exact_tol), 2, exact_tol);
  const auto hlow = hc.lower.template cast<double>();
  const auto mt = to_cochain2(target, lay);
  NewtonResult res{Matrix<double>::identity(g.n), 0, 0.0};
  for (;;) {
    LieAlgebra<double> cur;
    try {
      cur = conjugation_map(g, res.phi, Tolerance{1e-14});
    } catch (const Singular &) {
      throw NoConvergence("conjugate_nearby_bracket: iterate became singular");
    }
    const auto r = mt - to_cochain2(cur, lay);
    res.residual = sup_norm(r);
    if (!std::isfinite(res.residual)) throw NoConvergence("conjugate_nearby_bracket: residual is not finite");
    if (res.residual <= opt.tau) return res;
    if (res.iterations >= opt.max_iter)
      throw NoConvergence("conjugate_nearby_bracket: residual " + std::to_string(res.residual) + " after " +
                          std::to_string(res.iterations) + " iterations");
    const auto step = cochain1_matrix(hlow * r, g.n);
    res.phi = res.phi * (Matrix<double>::identity(g.n) - step);
    ++res.iterations;
  }
}

/// sl_2 in the basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = -2f.
template <Scalar T> LieAlgebra<T> sl2() {
  auto g = LieAlgebra<T>::zero(3);
  auto set = [&](std::size_t i, std::size_t j, std::size_t k, T v) {
    g.at(k, i, j) = v;
    g.at(k, j, i) = -v;
  };
  set(0, 1, 2, T(1));
  set(2, 0, 0, T(2));
  set(2, 1, 1, T(-2));
  return g;
}

/// bracket_t = C(exp(tN)) for nilpotent N, as an exact polynomial family.
template <Scalar T> BracketFamily<T> conjugation_family(const LieAlgebra<T> &g, const Matrix<T> &N, double t_max = 0.5) {
  const auto n = g.n;
  std::vector<Matrix<T>> fwd{Matrix<T>::identity(n)}, bwd{Matrix<T>::identity(n)};
  for (std::size_t k = 1;; ++k) {
    auto f = (T(1) / T(static_cast<long>(k))) * (fwd.back() * N);
    auto b = (T(-1) / T(static_cast<long>(k))) * (bwd.back() * N);
    if (f.is_zero()) break;
    if (k > n) throw PreconditionViolation("conjugation_family: N is not nilpotent");
    fwd.push_back(f);
    bwd.push_back(b);
  }
  const auto deg = fwd.size() - 1;
  BracketFamily<T> fam;
  fam.t_max = t_max;
  fam.coeffs.assign(3 * deg + 1, LieAlgebra<T>::zero(n));
  for (std::size_t a = 0; a <= deg; ++a)
    for (std::size_t b = 0; b <= deg; ++b)
      for (std::size_t c = 0; c <= deg; ++c)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            auto v = bwd[a] * g.bracket(fwd[b].column(i), fwd[c].column(j));
            for (std::size_t k = 0; k < n; ++k) fam.coeffs[a + b + c].at(k, i, j) += v[k];
          }
  while (fam.coeffs.size() > 1 && std::all_of(fam.coeffs.back().c.begin(), fam.coeffs.back().c.end(),
                                               [](const T &x) { return x == T(0); }))
    fam.coeffs.pop_back();
  return fam;
}

} // namespace perturba
