#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "perturba/trivialize.hpp"

namespace perturba {

/// Largest cochain arity stored densely (n <= 4 gives at most 4^5 coordinates).
inline constexpr int kMaxArity = 4;

namespace detail {
inline std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}
/// Base-n digits of a flat tuple index, most significant first.
inline std::vector<std::size_t> digits(std::size_t idx, std::size_t n, int len) {
  std::vector<std::size_t> d(static_cast<std::size_t>(len));
  for (int i = len - 1; i >= 0; --i) {
    d[static_cast<std::size_t>(i)] = idx % n;
    idx /= n;
  }
  return d;
}
inline std::size_t flat(const std::vector<std::size_t> &d, std::size_t n) {
  std::size_t r = 0;
  for (auto x : d) r = r * n + x;
  return r;
}
inline void require_arity(int k, const char *what) {
  if (k < 0 || k > kMaxArity)
    throw ArityViolation(std::string(what) + ": arity " + std::to_string(k) + " outside 0.." +
                         std::to_string(kMaxArity));
}
} // namespace detail

/// A multilinear map A^{(x)k} -> A. Coordinate of inputs (a_1..a_k) and
/// output o sits at flat(a_1..a_k) * n + o, so arity 1 is input * n + output.
template <Scalar T> struct HochschildCochain {
  std::size_t n = 0;
  int arity = 0;
  Vector<T> v;

  HochschildCochain() = default;
  HochschildCochain(std::size_t dim, int k) : n(dim), arity(k) {
    detail::require_arity(k, "cochain");
    v.assign(detail::ipow(n, k + 1), T(0));
  }
  HochschildCochain(std::size_t dim, int k, Vector<T> coords) : n(dim), arity(k), v(std::move(coords)) {
    detail::require_arity(k, "cochain");
    if (v.size() != detail::ipow(n, k + 1))
      throw ShapeMismatch("cochain of arity " + std::to_string(k) + ": expected " +
                          std::to_string(detail::ipow(n, k + 1)) + " coordinates, got " + std::to_string(v.size()));
  }

  std::size_t inputs() const { return detail::ipow(n, arity); }
  const T &at(std::size_t in, std::size_t out) const { return v[in * n + out]; }
  T &at(std::size_t in, std::size_t out) { return v[in * n + out]; }

  /// Value on basis inputs as a vector.
  Vector<T> value(std::size_t in) const { return Vector<T>(v.begin() + in * n, v.begin() + (in + 1) * n); }

  bool is_zero(const Tolerance &tol = {}) const { return is_zero_vector(v, tol); }

  template <Scalar U> HochschildCochain<U> cast() const {
    Vector<U> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = scalar_cast<U>(v[i]);
    return HochschildCochain<U>(n, arity, w);
  }

  void require_like(const HochschildCochain &o, const char *op) const {
    if (n != o.n || arity != o.arity) throw ShapeMismatch(std::string(op) + ": cochain shapes differ");
  }
  HochschildCochain operator+(const HochschildCochain &o) const {
    require_like(o, "cochain +");
    return HochschildCochain(n, arity, v + o.v);
  }
  HochschildCochain operator-(const HochschildCochain &o) const {
    require_like(o, "cochain -");
    return HochschildCochain(n, arity, v - o.v);
  }
  HochschildCochain operator-() const {
    auto r = *this;
    for (auto &x : r.v) x = -x;
    return r;
  }
  friend HochschildCochain operator*(const T &s, HochschildCochain a) {
    for (auto &x : a.v) x *= s;
    return a;
  }
  bool operator==(const HochschildCochain &o) const { return n == o.n && arity == o.arity && v == o.v; }
};

/// Matrix of a 1-cochain as a linear map, and back.
template <Scalar T> Matrix<T> linear_map(const HochschildCochain<T> &a) {
  if (a.arity != 1) throw ArityViolation("linear_map: arity must be 1");
  Matrix<T> m(a.n, a.n);
  for (std::size_t in = 0; in < a.n; ++in)
    for (std::size_t out = 0; out < a.n; ++out) m(out, in) = a.at(in, out);
  return m;
}
template <Scalar T> HochschildCochain<T> cochain_of(const Matrix<T> &m) {
  HochschildCochain<T> a(m.rows(), 1);
  for (std::size_t in = 0; in < a.n; ++in)
    for (std::size_t out = 0; out < a.n; ++out) a.at(in, out) = m(out, in);
  return a;
}

/// e_i e_j = sum_k m[(k n + i) n + j] e_k, with an optional unit.
template <Scalar T> struct AssocAlgebra {
  std::size_t n = 0;
  std::vector<T> m;
  std::optional<Vector<T>> unit;

  AssocAlgebra() = default;
  AssocAlgebra(std::size_t dim, std::vector<T> constants, std::optional<Vector<T>> u = std::nullopt)
      : n(dim), m(std::move(constants)), unit(std::move(u)) {
    if (m.size() != n * n * n) throw ShapeMismatch("algebra: expected n^3 structure constants");
    if (unit && unit->size() != n) throw ShapeMismatch("algebra: unit has the wrong length");
  }
  static AssocAlgebra from_product(const HochschildCochain<T> &mu, std::optional<Vector<T>> u = std::nullopt) {
    if (mu.arity != 2) throw ArityViolation("from_product: arity must be 2");
    const auto n = mu.n;
    std::vector<T> c(n * n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) c[(k * n + i) * n + j] = mu.at(i * n + j, k);
    return AssocAlgebra(n, c, std::move(u));
  }

  const T &at(std::size_t k, std::size_t i, std::size_t j) const { return m[(k * n + i) * n + j]; }

  /// The multiplication as a 2-cochain.
  HochschildCochain<T> product() const {
    HochschildCochain<T> mu(n, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) mu.at(i * n + j, k) = at(k, i, j);
    return mu;
  }

  Vector<T> mul(const Vector<T> &a, const Vector<T> &b) const {
    Vector<T> out(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == T(0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (b[j] == T(0)) continue;
        const T ab = a[i] * b[j];
        for (std::size_t k = 0; k < n; ++k) out[k] += at(k, i, j) * ab;
      }
    }
    return out;
  }

  template <Scalar U> AssocAlgebra<U> cast() const {
    std::vector<U> c(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) c[i] = scalar_cast<U>(m[i]);
    std::optional<Vector<U>> u;
    if (unit) {
      u.emplace(n);
      for (std::size_t i = 0; i < n; ++i) (*u)[i] = scalar_cast<U>((*unit)[i]);
    }
    return AssocAlgebra<U>(n, c, u);
  }
};

template <Scalar T> Vector<T> basis_vector(std::size_t n, std::size_t i) {
  Vector<T> e(n, T(0));
  e[i] = T(1);
  return e;
}

template <Scalar T> void require_assoc(const AssocAlgebra<T> &A, const Tolerance &tol = {}) {
  const auto n = A.n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const auto ei = basis_vector<T>(n, i), ej = basis_vector<T>(n, j), ek = basis_vector<T>(n, k);
        if (!is_zero_vector(A.mul(A.mul(ei, ej), ek) - A.mul(ei, A.mul(ej, ek)), tol))
          throw AxiomViolation("algebra is not associative at (" + std::to_string(i) + "," + std::to_string(j) + "," +
                               std::to_string(k) + ")");
      }
  if (A.unit)
    for (std::size_t i = 0; i < n; ++i) {
      const auto ei = basis_vector<T>(n, i);
      if (!is_zero_vector(A.mul(*A.unit, ei) - ei, tol) || !is_zero_vector(A.mul(ei, *A.unit) - ei, tol))
        throw AxiomViolation("declared unit fails on basis vector " + std::to_string(i));
    }
}

namespace detail {
/// Every term of the Hochschild differential of arity-k cochains for the
/// bilinear mu (associativity not required):
///   (da)(a_0..a_k) = a_0 a(a_1..a_k) + sum_i (-1)^i a(..a_{i-1}a_i..)
///                  + (-1)^{k+1} a(a_0..a_{k-1}) a_k.
/// f(row, col, coef) receives one coefficient of the matrix at a time.
template <Scalar T, class F> void for_each_d_term(const HochschildCochain<T> &mu, int k, F &&f) {
  const auto n = mu.n;
  const auto rows = ipow(n, k + 1);
  for (std::size_t in = 0; in < rows; ++in) {
    const auto a = digits(in, n, k + 1);
    for (std::size_t o = 0; o < n; ++o) {
      const auto row = in * n + o;
      std::vector<std::size_t> tail(a.begin() + 1, a.end());
      const auto tin = flat(tail, n);
      for (std::size_t j = 0; j < n; ++j)
        if (mu.at(a[0] * n + j, o) != T(0)) f(row, tin * n + j, mu.at(a[0] * n + j, o));
      for (int i = 1; i <= k; ++i) {
        const T sign = (i % 2 == 0) ? T(1) : T(-1);
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t l = 0; l < n; ++l) {
          const T c = mu.at(a[ui - 1] * n + a[ui], l);
          if (c == T(0)) continue;
          std::vector<std::size_t> merged(a.begin(), a.begin() + static_cast<long>(ui - 1));
          merged.push_back(l);
          merged.insert(merged.end(), a.begin() + static_cast<long>(ui + 1), a.end());
          f(row, flat(merged, n) * n + o, sign * c);
        }
      }
      const T sign = ((k + 1) % 2 == 0) ? T(1) : T(-1);
      std::vector<std::size_t> head(a.begin(), a.end() - 1);
      const auto hin = flat(head, n);
      for (std::size_t j = 0; j < n; ++j)
        if (mu.at(j * n + a[static_cast<std::size_t>(k)], o) != T(0))
          f(row, hin * n + j, sign * mu.at(j * n + a[static_cast<std::size_t>(k)], o));
    }
  }
}
} // namespace detail

/// d alpha for the (not necessarily associative) product mu.
template <Scalar T> HochschildCochain<T> hochschild_d(const HochschildCochain<T> &alpha, const HochschildCochain<T> &mu) {
  if (mu.arity != 2 || mu.n != alpha.n) throw ShapeMismatch("hochschild_d: product must be a 2-cochain on the same space");
  HochschildCochain<T> out(alpha.n, alpha.arity + 1);
  detail::for_each_d_term(mu, alpha.arity, [&](std::size_t r, std::size_t c, const T &x) { out.v[r] += x * alpha.v[c]; });
  return out;
}
template <Scalar T> HochschildCochain<T> hochschild_d(const HochschildCochain<T> &alpha, const AssocAlgebra<T> &A) {
  return hochschild_d(alpha, A.product());
}

/// Matrix of d : C^k -> C^{k+1}; linear in mu.
template <Scalar T> Matrix<T> hochschild_matrix(const HochschildCochain<T> &mu, int k) {
  detail::require_arity(k + 1, "hochschild_matrix");
  Matrix<T> d(detail::ipow(mu.n, k + 2), detail::ipow(mu.n, k + 1));
  detail::for_each_d_term(mu, k, [&](std::size_t r, std::size_t c, const T &x) { d(r, c) += x; });
  return d;
}

/// C^0 -> ... -> C^top for A.
template <Scalar T> Complex<T> hochschild_complex(const AssocAlgebra<T> &A, int top = 3, const Tolerance &tol = {}) {
  require_assoc(A, tol);
  detail::require_arity(top, "hochschild_complex");
  const auto mu = A.product();
  GradedModule mod;
  for (int k = 0; k <= top; ++k) mod.set_dim(k, static_cast<int>(detail::ipow(A.n, k + 1)));
  GradedMap<T> d(mod, mod, 1);
  for (int k = 0; k < top; ++k) d.set_block(k, hochschild_matrix(mu, k));
  return Complex<T>(mod, d);
}

/// (a o b)(a_1..a_{p+q-1}) = sum_i (-1)^{(q-1) i} a(a_1..a_i, b(a_{i+1}..a_{i+q}), ..).
template <Scalar T> HochschildCochain<T> circle(const HochschildCochain<T> &a, const HochschildCochain<T> &b) {
  if (a.arity < 1) throw ArityViolation("circle: left arity must be at least 1");
  if (a.n != b.n) throw ShapeMismatch("circle: cochains on different spaces");
  const auto n = a.n;
  const int p = a.arity, q = b.arity, r = p + q - 1;
  detail::require_arity(r, "circle");
  HochschildCochain<T> out(n, r);
  const auto rows = detail::ipow(n, r);
  for (std::size_t in = 0; in < rows; ++in) {
    const auto x = detail::digits(in, n, r);
    for (int i = 0; i < p; ++i) {
      const T sign = ((q - 1) * i) % 2 == 0 ? T(1) : T(-1);
      const auto ui = static_cast<std::size_t>(i), uq = static_cast<std::size_t>(q);
      std::vector<std::size_t> inner(x.begin() + static_cast<long>(ui), x.begin() + static_cast<long>(ui + uq));
      const auto bin = detail::flat(inner, n);
      for (std::size_t l = 0; l < n; ++l) {
        const T bl = b.at(bin, l);
        if (bl == T(0)) continue;
        std::vector<std::size_t> outer(x.begin(), x.begin() + static_cast<long>(ui));
        outer.push_back(l);
        outer.insert(outer.end(), x.begin() + static_cast<long>(ui + uq), x.end());
        const auto ain = detail::flat(outer, n);
        const T c = sign * bl;
        for (std::size_t o = 0; o < n; ++o) out.at(in, o) += c * a.at(ain, o);
      }
    }
  }
  return out;
}

/// [a, b] = a o b - (-1)^{(p-1)(q-1)} b o a.
template <Scalar T> HochschildCochain<T> gerstenhaber(const HochschildCochain<T> &a, const HochschildCochain<T> &b) {
  if (a.arity < 1 || b.arity < 1) throw ArityViolation("gerstenhaber: arities must be at least 1");
  const bool odd = ((a.arity - 1) * (b.arity - 1)) % 2 != 0;
  const auto ab = circle(a, b), ba = circle(b, a);
  return odd ? ab + ba : ab - ba;
}

/// The sign s with d(alpha) = s [alpha, m], fixed once by comparing
/// coordinates on a small non-commutative algebra.
inline int bracket_sign() {
  static const int s = [] {
    // Upper triangular 2x2 matrices, basis E11, E12, E22.
    std::vector<Rational> c(27, Rational(0));
    auto set = [&](std::size_t i, std::size_t j, std::size_t k) { c[(k * 3 + i) * 3 + j] = Rational(1); };
    set(0, 0, 0);
    set(0, 1, 1);
    set(1, 2, 1);
    set(2, 2, 2);
    const AssocAlgebra<Rational> A(3, c);
    const auto mu = A.product();
    int found = 0;
    for (int k = 1; k <= 3; ++k) {
      HochschildCochain<Rational> a(3, k);
      for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] = Rational(static_cast<long>((i * 7 + 3) % 5) - 2);
      const auto d = hochschild_d(a, mu), br = gerstenhaber(a, mu);
      int s = 0;
      if (d == br) s = 1;
      else if (d == -br) s = -1;
      if (s == 0 || (found != 0 && s != found)) throw InvariantViolation("d and [., m] are not related by a fixed sign");
      found = s;
    }
    return found;
  }();
  return s;
}

/// H^2 vanishing and its dimension.
template <Scalar T> int h2_dim(const AssocAlgebra<T> &A, const Tolerance &tol = {}) {
  return cohomology_basis(hochschild_complex(A, 3, tol), 2, tol).dim;
}

/// Maps h : C^2 -> C^1 and g : C^3 -> C^2 with b h + g b = 1 on C^2.
template <Scalar T> struct Degree2Splitting {
  Matrix<T> h;
  Matrix<T> g;

  Matrix<T> residual(const Complex<T> &C) const {
    return C.d().block(1) * h + g * C.d().block(2) - Matrix<T>::identity(h.cols());
  }
  bool holds(const Complex<T> &C, const Tolerance &tol = {}) const {
    if (h.cols() != static_cast<std::size_t>(C.dim(2)) || g.rows() != static_cast<std::size_t>(C.dim(2))) return false;
    return residual(C).is_zero(tol);
  }
  /// The same data in the b H + H b + 1 = 0 convention.
  DegreeContraction<T> contraction() const { return {2, -h, -g}; }
  template <Scalar U> Degree2Splitting<U> cast() const { return {h.template cast<U>(), g.template cast<U>()}; }
};

template <Scalar T> struct SplittingResult {
  std::optional<Degree2Splitting<T>> splitting;
  int h2_dim = 0;
  bool ok() const { return splitting.has_value(); }
};

template <Scalar T> SplittingResult<T> build_degree2_splitting(const AssocAlgebra<T> &A, const Tolerance &tol = {}) {
  const auto C = hochschild_complex(A, 3, tol);
  SplittingResult<T> res;
  res.h2_dim = cohomology_basis(C, 2, tol).dim;
  if (res.h2_dim != 0) return res;
  const auto hc = build_contraction(C, 2, tol);
  res.splitting = Degree2Splitting<T>{-hc.lower, -hc.upper};
  if (!res.splitting->holds(C, tol)) throw InvariantViolation("build_degree2_splitting: b h + g b != 1");
  return res;
}

/// Generalized-inverse maps of the same shape as a splitting, built without
/// the H^2 check. They split nothing when H^2 != 0; used for diagnostic runs.
template <Scalar T> Degree2Splitting<T> pseudo_splitting(const AssocAlgebra<T> &A, const Tolerance &tol = {}) {
  const auto C = hochschild_complex(A, 3, tol);
  const auto b1 = C.d().block(1), b2 = C.d().block(2);
  const auto g2 = generalized_inverse(b2, tol), g1 = generalized_inverse(b1, tol);
  return {g1 * (Matrix<T>::identity(b1.rows()) - g2 * b2), g2};
}

template <Scalar T> struct PoissonReport {
  bool is_cocycle = false;
  bool bracket_class_zero = false;
  std::optional<HochschildCochain<T>> certificate; ///< sigma with d sigma = [pi, pi]
};

template <Scalar T> PoissonReport<T> poisson_check(const HochschildCochain<T> &pi, const AssocAlgebra<T> &A,
                                                   const Tolerance &tol = {}) {
  if (pi.arity != 2 || pi.n != A.n) throw ShapeMismatch("poisson_check: expected a 2-cochain on A");
  const auto mu = A.product();
  PoissonReport<T> rep;
  rep.is_cocycle = hochschild_d(pi, mu).is_zero(tol);
  const auto br = gerstenhaber(pi, pi);
  if (auto s = solve(hochschild_matrix(mu, 2), br.v, tol)) {
    rep.bracket_class_zero = true;
    rep.certificate = HochschildCochain<T>(A.n, 2, *s);
  }
  return rep;
}

/// a * b = ab + sum_k c_k(a, b) t^k, truncated at order N = coeffs.size().
template <Scalar T> struct FormalDeformation {
  std::vector<HochschildCochain<T>> coeffs; ///< c_1 .. c_N
  int order() const { return static_cast<int>(coeffs.size()); }
  const HochschildCochain<T> &c(int k) const { return coeffs.at(static_cast<std::size_t>(k - 1)); }
};

/// d(c_k) - sum_{i+j=k; i,j>=1} c_i o c_j. The t^k coefficient of the
/// associator of * is minus this, so it vanishes iff order-k associativity
/// holds. At k = 2 it reads d(c_2) = c_1 o c_1 = [c_1, c_1] / 2.
template <Scalar T>
HochschildCochain<T> check_formal_order(const FormalDeformation<T> &def, const AssocAlgebra<T> &A, int k) {
  if (k < 1 || k > def.order())
    throw PreconditionViolation("check_formal_order: order " + std::to_string(k) + " outside 1.." +
                                std::to_string(def.order()));
  for (const auto &c : def.coeffs)
    if (c.arity != 2 || c.n != A.n) throw ShapeMismatch("formal deformation: coefficients must be 2-cochains on A");
  auto r = hochschild_d(def.c(k), A.product());
  for (int i = 1; i < k; ++i) r = r - circle(def.c(i), def.c(k - i));
  return r;
}

namespace detail {
template <Scalar T> using MapSeries = std::vector<Matrix<T>>;

/// f(P a, Q b) for a 2-cochain f.
template <Scalar T>
HochschildCochain<T> precompose(const HochschildCochain<T> &f, const Matrix<T> &P, const Matrix<T> &Q) {
  const auto n = f.n;
  HochschildCochain<T> out(n, 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t x = 0; x < n; ++x) {
        if (P(x, a) == T(0)) continue;
        for (std::size_t y = 0; y < n; ++y) {
          const T c = P(x, a) * Q(y, b);
          if (c == T(0)) continue;
          for (std::size_t o = 0; o < n; ++o) out.at(a * n + b, o) += c * f.at(x * n + y, o);
        }
      }
  return out;
}

template <Scalar T> HochschildCochain<T> postcompose(const Matrix<T> &R, const HochschildCochain<T> &f) {
  const auto n = f.n;
  HochschildCochain<T> out(n, 2);
  for (std::size_t in = 0; in < n * n; ++in) {
    const auto w = R * f.value(in);
    for (std::size_t o = 0; o < n; ++o) out.at(in, o) = w[o];
  }
  return out;
}

template <Scalar T> MapSeries<T> series_mul(const MapSeries<T> &a, const MapSeries<T> &b, std::size_t N) {
  const auto n = a.front().rows();
  MapSeries<T> r(N + 1, Matrix<T>(n, n));
  for (std::size_t i = 0; i < a.size() && i <= N; ++i)
    for (std::size_t j = 0; j < b.size() && i + j <= N; ++j) r[i + j] = r[i + j] + a[i] * b[j];
  return r;
}

/// (1 + P)^{-1} as a truncated geometric series; phi[0] must be 1.
template <Scalar T> MapSeries<T> series_inverse(const MapSeries<T> &phi, std::size_t N) {
  const auto n = phi.front().rows();
  MapSeries<T> P = phi;
  P.resize(N + 1, Matrix<T>(n, n));
  P[0] = Matrix<T>(n, n);
  MapSeries<T> inv(N + 1, Matrix<T>(n, n)), power(N + 1, Matrix<T>(n, n));
  inv[0] = power[0] = Matrix<T>::identity(n);
  for (std::size_t j = 1; j <= N; ++j) {
    power = series_mul(power, P, N);
    const T s = j % 2 == 0 ? T(1) : T(-1);
    for (std::size_t k = 0; k <= N; ++k) inv[k] = inv[k] + s * power[k];
  }
  return inv;
}
} // namespace detail

/// Coefficients 0..N of phi^{-1}(phi(a) * phi(b)), with c_0 = m.
template <Scalar T>
std::vector<HochschildCochain<T>> twist_product(const AssocAlgebra<T> &A, const FormalDeformation<T> &def,
                                                const std::vector<Matrix<T>> &phi) {
  const auto N = static_cast<std::size_t>(def.order());
  const auto inv = detail::series_inverse(phi, N);
  std::vector<HochschildCochain<T>> prod{A.product()};
  for (const auto &c : def.coeffs) prod.push_back(c);
  std::vector<HochschildCochain<T>> out(N + 1, HochschildCochain<T>(A.n, 2));
  for (std::size_t r = 0; r <= N; ++r)
    for (std::size_t i = 0; i < phi.size() && r + i <= N; ++i)
      for (std::size_t j = 0; j < phi.size() && r + i + j <= N; ++j) {
        const auto inner = detail::precompose(prod[r], phi[i], phi[j]);
        for (std::size_t g = 0; r + i + j + g <= N; ++g)
          out[r + i + j + g] = out[r + i + j + g] + detail::postcompose(inv[g], inner);
      }
  return out;
}

template <Scalar T> struct FormalTrivialization {
  std::vector<Matrix<T>> phi; ///< phi_1 .. phi_N; phi = 1 + sum phi_k t^k
};

namespace detail {
template <Scalar T>
FormalTrivialization<T> trivialize_formal_impl(const FormalDeformation<T> &def, const AssocAlgebra<T> &A,
                                               const std::optional<Degree2Splitting<T>> &split, const Tolerance &tol) {
  const auto C = hochschild_complex(A, 3, tol);
  if (split && !split->holds(C, tol)) throw SplittingInvalid("b h + g b != 1 on C^2");
  for (const auto &c : def.coeffs)
    if (c.arity != 2 || c.n != A.n) throw ShapeMismatch("formal deformation: coefficients must be 2-cochains on A");
  const auto n = A.n;
  const auto N = static_cast<std::size_t>(def.order());
  const auto b1 = C.d().block(1);
  std::vector<Matrix<T>> phi{Matrix<T>::identity(n)};
  phi.resize(N + 1, Matrix<T>(n, n));
  for (std::size_t k = 1; k <= N; ++k) {
    const auto cur = twist_product(A, def, phi)[k];
    // Lower orders are already trivial, so cur is a cocycle; find d psi = cur.
    Vector<T> psi;
    if (split) {
      psi = split->h * cur.v;
      if (!is_zero_vector(b1 * psi - cur.v, tol))
        throw ObstructionNonzero("order " + std::to_string(k) + " coefficient is not a coboundary");
    } else {
      auto s = solve(b1, cur.v, tol);
      if (!s) throw ObstructionNonzero("order " + std::to_string(k) + " coefficient is not a coboundary");
      psi = *s;
    }
    // Twisting by 1 - t^k psi removes d psi from the order-k coefficient.
    std::vector<Matrix<T>> step(k + 1, Matrix<T>(n, n));
    step[0] = Matrix<T>::identity(n);
    step[k] = -linear_map(HochschildCochain<T>(n, 1, psi));
    phi = series_mul(phi, step, N);
  }
  const auto out = twist_product(A, def, phi);
  for (std::size_t k = 1; k <= N; ++k)
    if (!out[k].is_zero(tol))
      throw InvariantViolation("trivialize_formal: twisted product differs at order " + std::to_string(k));
  return {std::vector<Matrix<T>>(phi.begin() + 1, phi.end())};
}
} // namespace detail

/// phi with phi^{-1}(phi(a) * phi(b)) = ab through order N, order by order.
template <Scalar T>
FormalTrivialization<T> trivialize_formal(const FormalDeformation<T> &def, const AssocAlgebra<T> &A,
                                          const Degree2Splitting<T> &split, const Tolerance &tol = {}) {
  return detail::trivialize_formal_impl(def, A, std::optional<Degree2Splitting<T>>(split), tol);
}
/// Same, solving d psi = c by exact linear algebra; no splitting needed.
template <Scalar T>
FormalTrivialization<T> trivialize_formal(const FormalDeformation<T> &def, const AssocAlgebra<T> &A,
                                          const Tolerance &tol = {}) {
  return detail::trivialize_formal_impl(def, A, std::optional<Degree2Splitting<T>>{}, tol);
}

/// The formal deformation phi^{-1}(phi(a) phi(b)) truncated at order N.
template <Scalar T>
FormalDeformation<T> gauge_deformation(const AssocAlgebra<T> &A, const std::vector<Matrix<T>> &phi_tail, int N) {
  std::vector<Matrix<T>> phi{Matrix<T>::identity(A.n)};
  phi.insert(phi.end(), phi_tail.begin(), phi_tail.end());
  FormalDeformation<T> zero;
  zero.coeffs.assign(static_cast<std::size_t>(N), HochschildCochain<T>(A.n, 2));
  auto out = twist_product(A, zero, phi);
  return {std::vector<HochschildCochain<T>>(out.begin() + 1, out.end())};
}

/// m_t = sum_r M_r t^r with M_0 the base product.
template <Scalar T> struct ProductFamily {
  std::vector<HochschildCochain<T>> coeffs;
  double t_min = 0.0, t_max = 1.0;

  std::size_t n() const { return coeffs.empty() ? 0 : coeffs.front().n; }
  HochschildCochain<T> at(const T &t) const {
    HochschildCochain<T> out(n(), 2);
    T power(1);
    for (const auto &c : coeffs) {
      out = out + power * c;
      power *= t;
    }
    return out;
  }
  HochschildCochain<T> derivative(const T &t) const {
    HochschildCochain<T> out(n(), 2);
    T power(1);
    for (std::size_t r = 1; r < coeffs.size(); ++r) {
      out = out + (T(static_cast<long>(r)) * power) * coeffs[r];
      power *= t;
    }
    return out;
  }
  AssocAlgebra<T> base() const { return AssocAlgebra<T>::from_product(coeffs.front()); }
  template <Scalar U> ProductFamily<U> cast() const {
    ProductFamily<U> f;
    for (const auto &c : coeffs) f.coeffs.push_back(c.template cast<U>());
    f.t_min = t_min;
    f.t_max = t_max;
    return f;
  }

  /// Associativity of m_t as a polynomial identity: sum_{i+j=d} M_i o M_j = 0.
  void validate(const Tolerance &tol = {}) const {
    if (coeffs.empty()) throw SchemaError("product family has no coefficients");
    for (const auto &c : coeffs)
      if (c.arity != 2 || c.n != n()) throw ShapeMismatch("product family: coefficients must be 2-cochains of one size");
    const auto deg = coeffs.size() - 1;
    for (std::size_t d = 0; d <= 2 * deg; ++d) {
      HochschildCochain<T> sum(n(), 3);
      for (std::size_t r = 0; r <= std::min(d, deg); ++r)
        if (d - r <= deg) sum = sum + circle(coeffs[r], coeffs[d - r]);
      if (!sum.is_zero(tol)) throw AxiomViolation("product family: associativity fails at order t^" + std::to_string(d));
    }
  }
};

/// max_{i,j} |h(e_i . e_j)_t - h(e_i) . h(e_j)|.
inline double product_defect(const AssocAlgebra<double> &A0, const HochschildCochain<double> &mt, const Matrix<double> &h) {
  const auto n = A0.n;
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto lhs = h * mt.value(i * n + j);
      const auto rhs = A0.mul(h.column(i), h.column(j));
      m = std::max(m, sup_norm(lhs - rhs));
    }
  return m;
}

/// ODE data: d_t - d_0 is d for the product m_t - m_0, and c_t = dm_t/dt.
template <Scalar T>
TrivializationProblem hochschild_problem(const ProductFamily<T> &fam_in, const Degree2Splitting<T> &split,
                                         const TrivializationOptions &opt = {}, const Tolerance &exact_tol = {}) {
  fam_in.validate(exact_tol);
  const auto A0 = fam_in.base();
  if (opt.strict && !split.holds(hochschild_complex(A0, 3, exact_tol), exact_tol))
    throw SplittingInvalid("b h + g b != 1 on C^2");
  const auto fam = fam_in.template cast<double>();
  const auto A0d = A0.template cast<double>();
  TrivializationProblem pb;
  pb.n = A0.n;
  pb.base = hochschild_complex(A0d, 3, Tolerance{1e-9});
  pb.contraction = split.template cast<double>().contraction();
  pb.delta_at = [fam, base = pb.base](double t) {
    const auto diff = fam.at(t) - fam.coeffs.front();
    GradedMap<double> delta(base.module(), base.module(), 1);
    for (int k = 0; k < 3; ++k) delta.set_block(k, hochschild_matrix(diff, k));
    return delta;
  };
  pb.cocycle_at = [fam, strict = opt.strict](double t) {
    const auto c = fam.derivative(t);
    if (strict && !hochschild_d(c, fam.at(t)).is_zero(Tolerance{1e-8}))
      throw NotClosed("dm_t/dt is not a cocycle for m_t");
    return c.v;
  };
  pb.defect = [fam, A0d](double t, const Matrix<double> &h) { return product_defect(A0d, fam.at(t), h); };
  return pb;
}

template <Scalar T>
TrivializationResult trivialize_product_family(const ProductFamily<T> &fam, const Degree2Splitting<T> &split,
                                               const TrivializationOptions &opt = {}, const Tolerance &exact_tol = {}) {
  return trivialize_path(hochschild_problem(fam, split, opt, exact_tol), opt);
}

/// m_t(a, b) = exp(-tN)(exp(tN) a . exp(tN) b) for nilpotent N.
template <Scalar T>
ProductFamily<T> product_conjugation_family(const AssocAlgebra<T> &A, const Matrix<T> &N, double t_max = 0.5) {
  const auto n = A.n;
  std::vector<Matrix<T>> fwd{Matrix<T>::identity(n)}, bwd{Matrix<T>::identity(n)};
  for (std::size_t k = 1;; ++k) {
    auto f = (T(1) / T(static_cast<long>(k))) * (fwd.back() * N);
    auto b = (T(-1) / T(static_cast<long>(k))) * (bwd.back() * N);
    if (f.is_zero()) break;
    if (k > n) throw PreconditionViolation("product_conjugation_family: N is not nilpotent");
    fwd.push_back(f);
    bwd.push_back(b);
  }
  const auto deg = fwd.size() - 1;
  const auto mu = A.product();
  ProductFamily<T> fam;
  fam.t_max = t_max;
  fam.coeffs.assign(3 * deg + 1, HochschildCochain<T>(n, 2));
  for (std::size_t a = 0; a <= deg; ++a)
    for (std::size_t b = 0; b <= deg; ++b)
      for (std::size_t c = 0; c <= deg; ++c)
        fam.coeffs[a + b + c] = fam.coeffs[a + b + c] + detail::postcompose(bwd[a], detail::precompose(mu, fwd[b], fwd[c]));
  while (fam.coeffs.size() > 1 && fam.coeffs.back().is_zero()) fam.coeffs.pop_back();
  return fam;
}

/// M_k(Q) in the basis E_ij (index i k + j), unital.
template <Scalar T> AssocAlgebra<T> matrix_algebra(std::size_t k) {
  const auto n = k * k;
  std::vector<T> c(n * n * n, T(0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < k; ++l) c[((i * k + l) * n + (i * k + j)) * n + (j * k + l)] = T(1);
  Vector<T> u(n, T(0));
  for (std::size_t i = 0; i < k; ++i) u[i * k + i] = T(1);
  return AssocAlgebra<T>(n, c, u);
}

/// Q[x]/(x^d) in the basis 1, x, .., x^{d-1}.
template <Scalar T> AssocAlgebra<T> truncated_polynomials(std::size_t d) {
  std::vector<T> c(d * d * d, T(0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; i + j < d; ++j) c[((i + j) * d + i) * d + j] = T(1);
  return AssocAlgebra<T>(d, c, basis_vector<T>(d, 0));
}

template <Scalar T> AssocAlgebra<T> dual_numbers() { return truncated_polynomials<T>(2); }

} // namespace perturba
