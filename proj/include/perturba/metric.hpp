#pragma once

#include <map>
#include <string>
#include <vector>

#include "perturba/hochschild.hpp"

namespace perturba {

/// n points with a distance matrix; exact rationals by default so the
/// contraction identity can be checked bit for bit.
template <Scalar T = Rational> struct FiniteMetricSpace {
  std::size_t n = 0;
  Matrix<T> rho;

  FiniteMetricSpace() = default;
  explicit FiniteMetricSpace(Matrix<T> d) : n(d.rows()), rho(std::move(d)) {
    if (!rho.square()) throw ShapeMismatch("metric: distance matrix must be square, got " + rho.shape_str());
  }

  const T &operator()(std::size_t x, std::size_t y) const { return rho(x, y); }

  void validate() const {
    for (std::size_t x = 0; x < n; ++x) {
      if (rho(x, x) != T(0)) throw AxiomViolation("metric: rho(x, x) != 0 at point " + std::to_string(x));
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        if (rho(x, y) != rho(y, x)) throw AxiomViolation("metric: rho is not symmetric");
        if (!(T(0) < rho(x, y))) throw AxiomViolation("metric: distinct points at distance <= 0");
        for (std::size_t z = 0; z < n; ++z)
          if (rho(x, z) + rho(z, y) < rho(x, y)) throw AxiomViolation("metric: triangle inequality fails");
      }
    }
  }
};

/// A function on M^k, stored over tuples in base-n order.
template <Scalar T = Rational> struct FunctionTensor {
  std::size_t n = 0;
  int arity = 0;
  Vector<T> v;

  FunctionTensor() = default;
  FunctionTensor(std::size_t points, int k) : n(points), arity(k), v(detail::ipow(points, k), T(0)) {}
  FunctionTensor(std::size_t points, int k, Vector<T> values) : n(points), arity(k), v(std::move(values)) {
    if (v.size() != detail::ipow(n, k))
      throw ShapeMismatch("function tensor of arity " + std::to_string(k) + " on " + std::to_string(n) +
                          " points: expected " + std::to_string(detail::ipow(n, k)) + " values, got " +
                          std::to_string(v.size()));
  }

  const T &operator[](const std::vector<std::size_t> &x) const { return v[detail::flat(x, n)]; }
  T &operator[](const std::vector<std::size_t> &x) { return v[detail::flat(x, n)]; }
  std::vector<std::size_t> tuple(std::size_t idx) const { return detail::digits(idx, n, arity); }
  bool operator==(const FunctionTensor &o) const { return n == o.n && arity == o.arity && v == o.v; }
};

/// f(x_0..x_m) = 0 is required whenever x_i = x_{i+1} with 0 <= i <= m - 2,
/// i.e. every adjacent pair except the last one.
inline bool is_normalized_tuple(const std::vector<std::size_t> &x) {
  for (std::size_t i = 0; i + 2 < x.size(); ++i)
    if (x[i] == x[i + 1]) return false;
  return true;
}

template <Scalar T> bool is_normalized(const FunctionTensor<T> &f) {
  for (std::size_t i = 0; i < f.v.size(); ++i)
    if (f.v[i] != T(0) && !is_normalized_tuple(f.tuple(i))) return false;
  return true;
}

template <Scalar T> FunctionTensor<T> normalize_project(FunctionTensor<T> f) {
  for (std::size_t i = 0; i < f.v.size(); ++i)
    if (!is_normalized_tuple(f.tuple(i))) f.v[i] = T(0);
  return f;
}

/// Restriction to the diagonal, C(M^2) -> C(M).
template <Scalar T> FunctionTensor<T> diagonal(const FunctionTensor<T> &f) {
  if (f.arity != 2) throw ArityViolation("diagonal: arity must be 2");
  FunctionTensor<T> out(f.n, 1);
  for (std::size_t x = 0; x < f.n; ++x) out.v[x] = f[{x, x}];
  return out;
}

/// Alternating: the plain sign sum_i (-1)^i. Signed: multiplied by
/// (-1)^arity, so the last face always enters with +; the contraction
/// identity holds on the normalized complex in this convention.
enum class BPrimeSign { Alternating, Signed };

/// Pointwise dual of b': (b'f)(y_0..y_m) = sum_{i=0}^{m} (-1)^i f(.., y_i, y_i, ..).
template <Scalar T> FunctionTensor<T> bprime(const FunctionTensor<T> &f, BPrimeSign sign = BPrimeSign::Alternating) {
  if (f.arity < 2) throw ArityViolation("bprime: arity must be at least 2, got " + std::to_string(f.arity));
  FunctionTensor<T> out(f.n, f.arity - 1);
  const bool flip = sign == BPrimeSign::Signed && f.arity % 2 != 0;
  for (std::size_t idx = 0; idx < out.v.size(); ++idx) {
    const auto y = out.tuple(idx);
    T s(0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto z = y;
      z.insert(z.begin() + static_cast<long>(i), y[i]);
      if (i % 2 == 0) s += f[z];
      else s -= f[z];
    }
    out.v[idx] = flip ? -s : s;
  }
  return out;
}

/// Which text of the third displayed component: the printed
/// k(x0,x1,x4,x4), k(x0,x2,x4,x4), or (x0,x1,x3,x4), (x0,x2,x3,x4).
enum class HReading { Corrected, Verbatim };

/// A linear functional f -> sum c_z f(z), keyed by flat tuple index.
template <Scalar T> using LinearForm = std::map<std::size_t, T>;

namespace detail {
/// P / (P + rho(x_k, x_{k+1})) with P = prod_{j<k} rho(x_j, x_{j+1}), k = |x| - 2.
/// A zero numerator gives 0 whatever the denominator.
template <Scalar T> T metric_weight(const FiniteMetricSpace<T> &ms, const std::vector<std::size_t> &x) {
  const std::size_t k = x.size() - 2;
  T P(1);
  for (std::size_t j = 0; j < k; ++j) P *= ms(x[j], x[j + 1]);
  if (P == T(0)) return T(0);
  const T den = P + ms(x[k], x[k + 1]);
  if (den == T(0)) throw InvariantViolation("metric weight: nonzero numerator over zero denominator");
  return P / den;
}

template <Scalar T> void add_term(LinearForm<T> &f, std::size_t z, const T &c) {
  if (c == T(0)) return;
  auto [it, fresh] = f.emplace(z, c);
  if (!fresh) {
    it->second += c;
    if (it->second == T(0)) f.erase(it);
  }
}

/// Form of h(.)(x) for inputs of arity |x| - 1, by the recursion
///   h_m(F)(x_0..x_m) = w(x_0..x_m) [F(x_0..x_{m-2}, x_m) - h_{m-1}(F(., x_m))(x_0..x_{m-1})].
template <Scalar T>
LinearForm<T> h_general_form(const FiniteMetricSpace<T> &ms, const std::vector<std::size_t> &x,
                             const std::vector<std::size_t> &suffix = {}) {
  LinearForm<T> out;
  const std::size_t m = x.size() - 1;
  if (m < 2) return out;
  const T w = metric_weight(ms, x);
  if (w == T(0)) return out;
  std::vector<std::size_t> head(x.begin(), x.begin() + static_cast<long>(m - 1));
  head.push_back(x[m]);
  head.insert(head.end(), suffix.begin(), suffix.end());
  add_term(out, flat(head, ms.n), w);
  std::vector<std::size_t> inner_suffix{x[m]};
  inner_suffix.insert(inner_suffix.end(), suffix.begin(), suffix.end());
  const auto inner = h_general_form(ms, std::vector<std::size_t>(x.begin(), x.end() - 1), inner_suffix);
  for (const auto &[z, c] : inner) add_term(out, z, -w * c);
  return out;
}

/// The three displayed components, written out term by term.
template <Scalar T>
LinearForm<T> h_displayed_form(const FiniteMetricSpace<T> &ms, const std::vector<std::size_t> &x, HReading reading) {
  LinearForm<T> out;
  const auto n = ms.n;
  auto w = [&](std::initializer_list<std::size_t> t) { return metric_weight(ms, std::vector<std::size_t>(t)); };
  auto at = [&](std::initializer_list<std::size_t> t) { return flat(std::vector<std::size_t>(t), n); };
  switch (x.size()) {
  case 3: {
    const auto x0 = x[0], x1 = x[1], x2 = x[2];
    add_term(out, at({x0, x2}), w({x0, x1, x2}));
    break;
  }
  case 4: {
    const auto x0 = x[0], x1 = x[1], x2 = x[2], x3 = x[3];
    const T w3 = w({x0, x1, x2, x3});
    add_term(out, at({x0, x1, x3}), w3);
    add_term(out, at({x0, x2, x3}), -w3 * w({x0, x1, x2}));
    break;
  }
  case 5: {
    const auto x0 = x[0], x1 = x[1], x2 = x[2], x3 = x[3], x4 = x[4];
    const T w4 = w({x0, x1, x2, x3, x4}), w3 = w({x0, x1, x2, x3}), w2 = w({x0, x1, x2});
    const bool verb = reading == HReading::Verbatim;
    add_term(out, at({x0, x1, x2, x4}), w4);
    add_term(out, verb ? at({x0, x1, x4, x4}) : at({x0, x1, x3, x4}), -w4 * w3);
    add_term(out, verb ? at({x0, x2, x4, x4}) : at({x0, x2, x3, x4}), w4 * w3 * w2);
    break;
  }
  default:
    throw ArityViolation("metric_h: displayed components cover arities 2..4 only");
  }
  return out;
}

template <Scalar T> FunctionTensor<T> apply_forms(const FunctionTensor<T> &f, int out_arity,
                                                  const std::function<LinearForm<T>(const std::vector<std::size_t> &)> &form) {
  FunctionTensor<T> out(f.n, out_arity);
  for (std::size_t idx = 0; idx < out.v.size(); ++idx) {
    T s(0);
    for (const auto &[z, c] : form(out.tuple(idx))) s += c * f.v[z];
    out.v[idx] = s;
  }
  return out;
}

template <Scalar T> void require_h_input(const FunctionTensor<T> &f, const FiniteMetricSpace<T> &ms) {
  if (f.n != ms.n) throw ShapeMismatch("metric_h: tensor and metric space have different point counts");
  if (f.arity < 2) throw ArityViolation("metric_h: arity must be at least 2");
  if (f.arity == 2) {
    for (std::size_t x = 0; x < f.n; ++x)
      if (f[{x, x}] != T(0)) throw DomainViolation("metric_h: arity-2 input is not in ker(m)");
  } else if (!is_normalized(f)) {
    throw DomainViolation("metric_h: input is not normalized");
  }
}
} // namespace detail

/// The displayed contracting homotopy on arities 2, 3, 4; output normalized.
template <Scalar T>
FunctionTensor<T> metric_h(const FunctionTensor<T> &f, const FiniteMetricSpace<T> &ms,
                           HReading reading = HReading::Corrected) {
  detail::require_h_input(f, ms);
  if (f.arity > 4) throw ArityViolation("metric_h: arity " + std::to_string(f.arity) + " outside 2..4");
  return normalize_project(detail::apply_forms<T>(
      f, f.arity + 1, [&](const std::vector<std::size_t> &x) { return detail::h_displayed_form(ms, x, reading); }));
}

/// The recursion extrapolated from the displayed components, for any arity.
template <Scalar T> FunctionTensor<T> metric_h_general(const FunctionTensor<T> &f, const FiniteMetricSpace<T> &ms) {
  detail::require_h_input(f, ms);
  return normalize_project(detail::apply_forms<T>(
      f, f.arity + 1, [&](const std::vector<std::size_t> &x) { return detail::h_general_form(ms, x); }));
}

struct MetricDegreeCheck {
  int arity = 0;
  std::string homotopy;        ///< which h enters: "displayed" or "general"
  std::size_t basis = 0;       ///< dimension of the normalized space tested
  std::size_t mismatches = 0;  ///< coefficients where the identity fails
  bool h_normalized = true;    ///< h maps into the normalized complex
  bool bprime_normalized = true;
  bool ok() const { return mismatches == 0 && h_normalized && bprime_normalized; }
};

struct MetricContractionReport {
  std::vector<MetricDegreeCheck> degrees;
  bool ok() const {
    for (const auto &d : degrees)
      if (!d.ok()) return false;
    return true;
  }
};

struct MetricContractionOptions {
  HReading reading = HReading::Corrected;
  BPrimeSign sign = BPrimeSign::Signed;
  int displayed_up_to = 4; ///< h of arity <= this uses the displayed components
};

/// b'h + hb' = 1 on the normalized complex for arities 3..max_arity, and
/// b'h = 1 on ker(m) at arity 2, coefficient by coefficient on the sparse
/// linear forms of both sides. Exact for rational distances.
template <Scalar T>
MetricContractionReport verify_contraction(const FiniteMetricSpace<T> &ms, int max_arity,
                                           const MetricContractionOptions &opt = {}) {
  ms.validate();
  const auto n = ms.n;
  auto h_form = [&](const std::vector<std::size_t> &x) {
    const int in_arity = static_cast<int>(x.size()) - 1;
    return in_arity <= opt.displayed_up_to ? detail::h_displayed_form(ms, x, opt.reading) : detail::h_general_form(ms, x);
  };
  // A point of the normalized domain at arity L (ker m at L = 2).
  auto in_domain = [](const std::vector<std::size_t> &z) {
    return z.size() == 2 ? z[0] != z[1] : is_normalized_tuple(z);
  };
  // Form of (b' F)(y) in terms of F on tuples one longer.
  auto bp_form = [&](const std::vector<std::size_t> &y) {
    LinearForm<T> out;
    const int in_arity = static_cast<int>(y.size()) + 1;
    const bool flip = opt.sign == BPrimeSign::Signed && in_arity % 2 != 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      auto z = y;
      z.insert(z.begin() + static_cast<long>(i), y[i]);
      T c = i % 2 == 0 ? T(1) : T(-1);
      detail::add_term(out, detail::flat(z, n), flip ? -c : c);
    }
    return out;
  };
  MetricContractionReport rep;
  for (int L = 2; L <= max_arity; ++L) {
    MetricDegreeCheck d;
    d.arity = L;
    d.homotopy = L <= opt.displayed_up_to ? "displayed" : "general";
    const auto count = detail::ipow(n, L);
    for (std::size_t idx = 0; idx < count; ++idx)
      if (in_domain(detail::digits(idx, n, L))) ++d.basis;
    // h lands in the normalized tensors of arity L + 1.
    for (std::size_t idx = 0; idx < detail::ipow(n, L + 1); ++idx) {
      const auto x = detail::digits(idx, n, L + 1);
      if (is_normalized_tuple(x)) continue;
      for (const auto &[z, c] : h_form(x))
        if (in_domain(detail::digits(z, n, L))) d.h_normalized = false;
    }
    // b' maps normalized arity L + 1 tensors to normalized arity L tensors.
    if (L >= 3)
      for (std::size_t idx = 0; idx < count; ++idx) {
        const auto y = detail::digits(idx, n, L);
        if (is_normalized_tuple(y)) continue;
        for (const auto &[z, c] : bp_form(y))
          if (is_normalized_tuple(detail::digits(z, n, L + 1))) d.bprime_normalized = false;
      }
    for (std::size_t idx = 0; idx < count; ++idx) {
      const auto y = detail::digits(idx, n, L);
      LinearForm<T> total;
      for (const auto &[z, c] : bp_form(y))
        for (const auto &[u, e] : h_form(detail::digits(z, n, L + 1))) detail::add_term(total, u, c * e);
      if (L >= 3) {
        for (const auto &[z, c] : h_form(y))
          for (const auto &[u, e] : bp_form(detail::digits(z, n, L - 1))) detail::add_term(total, u, c * e);
      }
      for (std::size_t u = 0; u < count; ++u) {
        if (!in_domain(detail::digits(u, n, L))) continue;
        const auto it = total.find(u);
        const T got = it == total.end() ? T(0) : it->second;
        if (got != (u == idx ? T(1) : T(0))) ++d.mismatches;
      }
    }
    rep.degrees.push_back(d);
  }
  return rep;
}

/// C(M) for finite M: pointwise multiplication on the indicator basis.
template <Scalar T> AssocAlgebra<T> function_algebra(const FiniteMetricSpace<T> &ms) {
  const auto n = ms.n;
  std::vector<T> c(n * n * n, T(0));
  for (std::size_t i = 0; i < n; ++i) c[(i * n + i) * n + i] = T(1);
  return AssocAlgebra<T>(n, c, Vector<T>(n, T(1)));
}

} // namespace perturba
