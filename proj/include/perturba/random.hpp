#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <algorithm>
#include <string>

#include "perturba/he_data.hpp"

namespace perturba {

/// Seed from PERTURBA_SEED, else `fallback`.
inline std::uint64_t default_seed(std::uint64_t fallback = 20240601) {
  if (const char *s = std::getenv("PERTURBA_SEED")) {
    try {
      return std::stoull(s);
    } catch (...) {
    }
  }
  return fallback;
}

class Rng {
public:
  explicit Rng(std::uint64_t seed = default_seed()) : gen_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  std::mt19937_64 &engine() { return gen_; }

  /// Small rational p/q with |p| <= bound, 1 <= q <= den.
  template <Scalar T> T small(int bound = 3, int den = 1) {
    if constexpr (is_exact_v<T>) return T(integer(-bound, bound), integer(1, den));
    else return static_cast<double>(integer(-bound, bound)) / integer(1, den);
  }

  template <Scalar T> Matrix<T> matrix(std::size_t r, std::size_t c, int bound = 3, int den = 1) {
    Matrix<T> m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = small<T>(bound, den);
    return m;
  }

  /// Unimodular integer matrix (unit lower times unit upper, rows permuted).
  template <Scalar T> Matrix<T> unimodular(std::size_t n, int bound = 1) {
    auto lo = Matrix<T>::identity(n), up = Matrix<T>::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        lo(i, j) = small<T>(bound);
        up(j, i) = small<T>(bound);
      }
    auto m = lo * up;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), gen_);
    Matrix<T> out(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) = m(perm[i], j);
    return out;
  }

private:
  std::mt19937_64 gen_;
};

/// Complex with given cochain dimensions and cohomology dimensions, as a
/// degreewise change of basis of the standard form. Also returns a contraction
/// of the acyclic part (ip = 1 + bh + hb with i, p the cohomology inclusion
/// and projection in the new basis).
template <Scalar T> struct RandomComplex {
  Complex<T> complex;
  Complex<T> cohomology; ///< zero differential
  GradedMap<T> i, p, h;
  HEData<T> he() const { return {cohomology, complex, i, p, h}; }
};

/// ranks[k] = rank of d_k. dims follow from cohomology and ranks:
/// dim C^k = rank d_{k-1} + dim H^k + rank d_k.
template <Scalar T>
RandomComplex<T> random_complex(Rng &rng, const std::map<int, int> &cohomology, const std::map<int, int> &ranks,
                                bool change_basis = true) {
  auto get = [](const std::map<int, int> &m, int k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  };
  std::set<int> degrees;
  for (auto [k, v] : cohomology) degrees.insert(k);
  for (auto [k, v] : ranks) {
    degrees.insert(k);
    degrees.insert(k + 1);
  }
  GradedModule mod, hmod;
  for (int k : degrees) {
    mod.set_dim(k, get(ranks, k - 1) + get(cohomology, k) + get(ranks, k));
    hmod.set_dim(k, get(cohomology, k));
  }
  // Standard form in degree k: coordinates [ image of d_{k-1} | H^k | complement mapped by d_k ].
  GradedMap<T> d(mod, mod, 1), i(hmod, mod, 0), p(mod, hmod, 0), h(mod, mod, -1);
  for (int k : degrees) {
    const int in = get(ranks, k - 1), hk = get(cohomology, k), out = get(ranks, k);
    if (out > 0) {
      Matrix<T> dk(mod.dim(k + 1), mod.dim(k));
      Matrix<T> hk1(mod.dim(k), mod.dim(k + 1));
      for (int j = 0; j < out; ++j) {
        dk(j, in + hk + j) = T(1);
        hk1(in + hk + j, j) = T(-1);
      }
      d.set_block(k, dk);
      h.set_block(k + 1, hk1);
    }
    if (hk > 0) {
      Matrix<T> ik(mod.dim(k), hk), pk(hk, mod.dim(k));
      for (int j = 0; j < hk; ++j) {
        ik(in + j, j) = T(1);
        pk(j, in + j) = T(1);
      }
      i.set_block(k, ik);
      p.set_block(k, pk);
    }
  }
  if (change_basis) {
    GradedMap<T> g(mod, mod, 0), ginv(mod, mod, 0);
    for (int k : degrees) {
      const auto n = static_cast<std::size_t>(mod.dim(k));
      if (n == 0) continue;
      auto gk = rng.template unimodular<T>(n);
      g.set_block(k, gk);
      ginv.set_block(k, *inverse(gk));
    }
    d = compose(compose(g, d), ginv);
    h = compose(compose(g, h), ginv);
    i = compose(g, i);
    p = compose(p, ginv);
  }
  return {Complex<T>(mod, d), Complex<T>::zero(hmod), i, p, h};
}

/// Random data over the complex, made non-DR by an extra homotopy k:
/// i' = i + bk + kb, h' = h + kp.
template <Scalar T> HEData<T> random_he(Rng &rng, const std::map<int, int> &cohomology, const std::map<int, int> &ranks,
                                        bool dr = false) {
  auto rc = random_complex<T>(rng, cohomology, ranks);
  auto he = rc.he();
  if (dr) return he;
  GradedMap<T> k(he.L.module(), he.M.module(), -1);
  for (auto [deg, n] : he.L.module().dims()) {
    const int m = he.M.module().dim(deg - 1);
    if (m > 0) k.set_block(deg, rng.template matrix<T>(m, n, 1));
  }
  he.i = he.i + compose(he.M.d(), k) + compose(k, he.L.d());
  he.h = he.h + compose(k, he.p);
  return he;
}

/// delta = g b g^{-1} - b with g = 1 + s N, N small integer, per degree.
template <Scalar T> GradedMap<T> random_conjugation_perturbation(Rng &rng, const Complex<T> &M, const T &s) {
  const auto &mod = M.module();
  GradedMap<T> g(mod, mod, 0), ginv(mod, mod, 0);
  for (auto [k, n] : mod.dims()) {
    for (int attempt = 0;; ++attempt) {
      auto gk = Matrix<T>::identity(n) + s * rng.template matrix<T>(n, n, 1);
      auto inv = inverse(gk);
      if (inv) {
        g.set_block(k, gk);
        ginv.set_block(k, *inv);
        break;
      }
      if (attempt > 50) throw InvariantViolation("random_conjugation_perturbation: no invertible sample");
    }
  }
  return compose(compose(g, M.d()), ginv) - M.d();
}

} // namespace perturba
