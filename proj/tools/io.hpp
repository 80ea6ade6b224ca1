#pragma once

// JSON bundles <-> library types. Every reader takes the JSON path of the
// value it parses and raises SchemaError naming that path.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "perturba/constructions.hpp"
#include "perturba/hochschild.hpp"
#include "perturba/lie.hpp"
#include "perturba/metric.hpp"

namespace perturba::io {

using json = nlohmann::json;

/// Unreadable file; distinct from a malformed one.
class IoError : public Error {
public:
  explicit IoError(const std::string &what) : Error("IoError: " + what) {}
};

[[noreturn]] inline void fail(const std::string &where, const std::string &msg) { throw SchemaError(where + ": " + msg); }

/// Message of a library error without its kind prefix.
inline std::string bare(const std::exception &e) {
  const std::string w = e.what();
  const auto colon = w.find(": ");
  return colon == std::string::npos ? w : w.substr(colon + 2);
}

inline std::string key_path(const std::string &where, const std::string &key) { return where + "." + key; }
inline std::string index_path(const std::string &where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

inline json load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error &e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline const char *type_name(const json &v) { return v.type_name(); }

inline void require_object(const json &v, const std::string &where) {
  if (!v.is_object()) fail(where, std::string("expected an object, got ") + type_name(v));
}

inline void require_array(const json &v, const std::string &where) {
  if (!v.is_array()) fail(where, std::string("expected an array, got ") + type_name(v));
}

/// Rejects keys outside `allowed`.
inline void only_keys(const json &v, std::initializer_list<const char *> allowed, const std::string &where) {
  require_object(v, where);
  for (const auto &[k, _] : v.items()) {
    bool ok = false;
    for (const char *a : allowed) ok = ok || k == a;
    if (!ok) fail(key_path(where, k), "unknown field");
  }
}

inline const json &field(const json &v, const char *key, const std::string &where) {
  require_object(v, where);
  auto it = v.find(key);
  if (it == v.end()) fail(key_path(where, key), "missing required field");
  return *it;
}

inline const json *optional_field(const json &v, const char *key) {
  auto it = v.find(key);
  return it == v.end() ? nullptr : &*it;
}

inline long integer(const json &v, const std::string &where) {
  if (!v.is_number_integer()) fail(where, std::string("expected an integer, got ") + type_name(v));
  return v.get<long>();
}

inline std::size_t count(const json &v, const std::string &where) {
  const long n = integer(v, where);
  if (n < 0) fail(where, "expected a non-negative integer, got " + std::to_string(n));
  return static_cast<std::size_t>(n);
}

inline double real(const json &v, const std::string &where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return Rational::parse(v.get<std::string>()).to_double();
    } catch (const SchemaError &e) {
      fail(where, bare(e));
    }
  }
  fail(where, std::string("expected a number, got ") + type_name(v));
}

inline int parse_int(const std::string &s, const std::string &where) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) fail(where, "expected an integer key, got '" + s + "'");
  return out;
}

inline Bidegree parse_bidegree(const std::string &s, const std::string &where) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) fail(where, "expected a \"p,q\" key, got '" + s + "'");
  return {parse_int(s.substr(0, comma), where), parse_int(s.substr(comma + 1), where)};
}

/// Exact mode accepts integers and "p/q" or decimal strings; float literals
/// would already have been rounded by the JSON reader and are refused.
template <Scalar T> T scalar(const json &v, const std::string &where) {
  if (v.is_number_integer()) {
    if constexpr (is_exact_v<T>) return Rational(v.get<long>());
    else return static_cast<double>(v.get<long>());
  }
  if (v.is_number_float()) {
    if constexpr (is_exact_v<T>) fail(where, "floating-point literal in rational mode; write it as a \"p/q\" string");
    else return v.get<double>();
  }
  if (v.is_string()) {
    Rational r;
    try {
      r = Rational::parse(v.get<std::string>());
    } catch (const SchemaError &e) {
      fail(where, bare(e));
    }
    if constexpr (is_exact_v<T>) return r;
    else return r.to_double();
  }
  fail(where, std::string("expected a scalar, got ") + type_name(v));
}

template <Scalar T> Vector<T> vector(const json &v, std::size_t len, const std::string &where) {
  require_array(v, where);
  if (v.size() != len) fail(where, "expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
  Vector<T> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = scalar<T>(v[i], index_path(where, i));
  return out;
}

/// Row-major nested arrays of the given shape; a 0-row matrix is [].
template <Scalar T>
Matrix<T> matrix(const json &v, std::size_t rows, std::size_t cols, const std::string &where,
                 const std::string &what = "") {
  const std::string expect = "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix" +
                             (what.empty() ? "" : " for " + what);
  require_array(v, where);
  if (v.size() != rows) fail(where, expect + ", got " + std::to_string(v.size()) + " rows");
  Matrix<T> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto rp = index_path(where, r);
    require_array(v[r], rp);
    if (v[r].size() != cols) fail(rp, expect + ", got a row of length " + std::to_string(v[r].size()));
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scalar<T>(v[r][c], index_path(rp, c));
  }
  return m;
}

/// Square matrix of inferred size.
template <Scalar T> Matrix<T> square_matrix(const json &v, const std::string &where) {
  require_array(v, where);
  return matrix<T>(v, v.size(), v.size(), where);
}

inline Orientation orientation(const json &bundle, const std::string &where) {
  const json *o = optional_field(bundle, "orientation");
  if (!o) return Orientation::Cochain;
  const auto p = key_path(where, "orientation");
  if (!o->is_string()) fail(p, "expected \"cochain\" or \"chain\"");
  const auto s = o->get<std::string>();
  if (s == "cochain") return Orientation::Cochain;
  if (s == "chain") return Orientation::Chain;
  fail(p, "expected \"cochain\" or \"chain\", got \"" + s + "\"");
}

/// JSON degrees are in the file's orientation; storage is cochain.
inline int stored_degree(int k, Orientation o) { return o == Orientation::Chain ? -k : k; }

inline std::map<int, int> dims(const json &v, const std::string &where) {
  require_object(v, where);
  std::map<int, int> out;
  for (const auto &[k, n] : v.items()) {
    const auto p = key_path(where, k);
    out[parse_int(k, p)] = static_cast<int>(count(n, p));
  }
  return out;
}

/// Blocks keyed by source degree in the file's orientation.
template <Scalar T> void read_blocks(const json &blocks, GradedMap<T> &out, Orientation o, const std::string &where) {
  require_object(blocks, where);
  for (const auto &[key, m] : blocks.items()) {
    const auto p = key_path(where, key);
    const int k = parse_int(key, p);
    const int ks = stored_degree(k, o);
    const auto rows = static_cast<std::size_t>(out.target().dim(ks + out.shift()));
    const auto cols = static_cast<std::size_t>(out.source().dim(ks));
    out.set_block(ks, matrix<T>(m, rows, cols, p, "the block at degree " + std::to_string(k)));
  }
}

/// {"shift": s, "blocks": {"k": matrix}}; `shift` is in the file's
/// orientation and must equal the expected one when present.
template <Scalar T>
GradedMap<T> graded_map(const json &v, const GradedModule &source, const GradedModule &target, int shift,
                        Orientation o, const std::string &where) {
  only_keys(v, {"shift", "blocks"}, where);
  const int file_shift = o == Orientation::Chain ? -shift : shift;
  if (const json *s = optional_field(v, "shift")) {
    const long got = integer(*s, key_path(where, "shift"));
    if (got != file_shift)
      fail(key_path(where, "shift"), "expected degree " + std::to_string(file_shift) + ", got " + std::to_string(got));
  }
  GradedMap<T> out(source, target, shift);
  read_blocks(field(v, "blocks", where), out, o, key_path(where, "blocks"));
  return out;
}

template <Scalar T> Complex<T> complex(const json &v, const std::string &where) {
  only_keys(v, {"orientation", "dims", "d"}, where);
  const auto o = orientation(v, where);
  GradedModule m;
  for (auto [k, n] : dims(field(v, "dims", where), key_path(where, "dims"))) m.set_dim(stored_degree(k, o), n);
  GradedMap<T> d(m, m, 1);
  if (const json *dj = optional_field(v, "d")) read_blocks(*dj, d, o, key_path(where, "d"));
  return Complex<T>(m, d, o);
}

template <Scalar T> HEData<T> he_bundle(const json &v, const std::string &where = "$") {
  only_keys(v, {"L", "M", "i", "p", "h"}, where);
  auto L = complex<T>(field(v, "L", where), key_path(where, "L"));
  auto M = complex<T>(field(v, "M", where), key_path(where, "M"));
  if (L.orientation() != M.orientation()) fail(where, "L and M must share an orientation");
  const auto o = L.orientation();
  auto i = graded_map<T>(field(v, "i", where), L.module(), M.module(), 0, o, key_path(where, "i"));
  auto p = graded_map<T>(field(v, "p", where), M.module(), L.module(), 0, o, key_path(where, "p"));
  auto h = graded_map<T>(field(v, "h", where), M.module(), M.module(), -1, o, key_path(where, "h"));
  return {L, M, i, p, h};
}

/// A perturbation of M: a graded map of degree +1 (chain degree -1).
template <Scalar T> GradedMap<T> perturbation(const json &v, const Complex<T> &M, const std::string &where = "$") {
  return graded_map<T>(v, M.module(), M.module(), 1, M.orientation(), where);
}

template <Scalar T> std::map<Bidegree, Matrix<T>> bigraded_blocks(const json &v, const DoubleComplex<T> &dc, int dp,
                                                                  int dq, const std::string &where) {
  require_object(v, where);
  std::map<Bidegree, Matrix<T>> out;
  for (const auto &[key, m] : v.items()) {
    const auto p = key_path(where, key);
    const auto b = parse_bidegree(key, p);
    const auto rows = static_cast<std::size_t>(dc.dim(b.first + dp, b.second + dq));
    const auto cols = static_cast<std::size_t>(dc.dim(b.first, b.second));
    out[b] = matrix<T>(m, rows, cols, p, "the block at bidegree (" + key + ")");
  }
  return out;
}

/// {"dims":{"p,q":n}, "horizontal":{"p,q":C_{p,q}->C_{p-1,q}},
///  "vertical":{"p,q":C_{p,q}->C_{p,q+1}}, "koszul": bool}. With "koszul"
/// the squares are taken to commute and signs are inserted.
template <Scalar T> DoubleComplex<T> double_complex(const json &v, const std::string &where = "$") {
  only_keys(v, {"dims", "horizontal", "vertical", "koszul"}, where);
  std::map<Bidegree, int> d;
  const auto &dj = field(v, "dims", where);
  const auto dp = key_path(where, "dims");
  require_object(dj, dp);
  for (const auto &[key, n] : dj.items()) {
    const auto p = key_path(dp, key);
    const auto b = parse_bidegree(key, p);
    if (b.first < 0 || b.second < 0) fail(p, "bidegrees must be non-negative");
    d[b] = static_cast<int>(count(n, p));
  }
  DoubleComplex<T> dc(d);
  if (const json *h = optional_field(v, "horizontal"))
    for (auto &[b, m] : bigraded_blocks<T>(*h, dc, -1, 0, key_path(where, "horizontal")))
      dc.set_horizontal(b.first, b.second, m);
  if (const json *vv = optional_field(v, "vertical"))
    for (auto &[b, m] : bigraded_blocks<T>(*vv, dc, 0, 1, key_path(where, "vertical")))
      dc.set_vertical(b.first, b.second, m);
  if (const json *k = optional_field(v, "koszul")) {
    if (!k->is_boolean()) fail(key_path(where, "koszul"), "expected a boolean");
    if (k->get<bool>()) dc = dc.with_koszul_signs();
  }
  return dc;
}

/// Chain complex A (+) A' with blocks keyed by source chain degree:
/// {"dims_a", "dims_b", "alpha", "beta", "gamma", "delta", "H"}.
template <Scalar T> BlockComplex<T> block_complex(const json &v, const std::string &where = "$") {
  only_keys(v, {"dims_a", "dims_b", "alpha", "beta", "gamma", "delta", "H"}, where);
  BlockComplex<T> bc;
  bc.dim_a = dims(field(v, "dims_a", where), key_path(where, "dims_a"));
  bc.dim_b = dims(field(v, "dims_b", where), key_path(where, "dims_b"));
  auto read = [&](const char *name, std::map<int, Matrix<T>> &dst, auto rows, auto cols) {
    const json *j = optional_field(v, name);
    if (!j) return;
    const auto p = key_path(where, name);
    require_object(*j, p);
    for (const auto &[key, m] : j->items()) {
      const auto kp = key_path(p, key);
      const int n = parse_int(key, kp);
      dst[n] = matrix<T>(m, static_cast<std::size_t>(rows(n)), static_cast<std::size_t>(cols(n)), kp,
                         std::string(name) + " at degree " + key);
    }
  };
  auto a = [&](int n) { return bc.a(n); };
  auto b = [&](int n) { return bc.b(n); };
  read("alpha", bc.alpha, [&](int n) { return a(n - 1); }, a);
  read("beta", bc.beta, [&](int n) { return a(n - 1); }, b);
  read("gamma", bc.gamma, [&](int n) { return b(n - 1); }, a);
  read("delta", bc.delta, [&](int n) { return b(n - 1); }, b);
  read("H", bc.H, [&](int n) { return b(n + 1); }, b);
  return bc;
}

/// t[k][i][j]: coefficient of e_k in e_i . e_j, flattened as (k n + i) n + j.
template <Scalar T> std::vector<T> tensor3(const json &v, std::size_t n, const std::string &where) {
  require_array(v, where);
  const auto expect = "expected an " + std::to_string(n) + "x" + std::to_string(n) + "x" + std::to_string(n) + " tensor";
  if (v.size() != n) fail(where, expect + ", got " + std::to_string(v.size()) + " slices");
  std::vector<T> out(n * n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto m = matrix<T>(v[k], n, n, index_path(where, k), "slice " + std::to_string(k) + " of the tensor");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[(k * n + i) * n + j] = m(i, j);
  }
  return out;
}

template <Scalar T> LieAlgebra<T> lie_algebra(const json &v, const std::string &where = "$") {
  only_keys(v, {"dim", "c"}, where);
  const auto n = count(field(v, "dim", where), key_path(where, "dim"));
  return LieAlgebra<T>(n, tensor3<T>(field(v, "c", where), n, key_path(where, "c")));
}

inline void read_interval(const json &v, double &t_min, double &t_max, const std::string &where) {
  if (const json *t = optional_field(v, "t_max")) t_max = real(*t, key_path(where, "t_max"));
  if (const json *t = optional_field(v, "t_min")) t_min = real(*t, key_path(where, "t_min"));
}

/// {"coeffs": [B_0, B_1, ...], "t_max": x} with B_0 the base bracket.
template <Scalar T> BracketFamily<T> bracket_family(const json &v, std::size_t n, const std::string &where = "$") {
  only_keys(v, {"coeffs", "t_min", "t_max"}, where);
  const auto &cj = field(v, "coeffs", where);
  const auto cp = key_path(where, "coeffs");
  require_array(cj, cp);
  if (cj.empty()) fail(cp, "expected at least the base bracket");
  BracketFamily<T> fam;
  for (std::size_t r = 0; r < cj.size(); ++r) fam.coeffs.emplace_back(n, tensor3<T>(cj[r], n, index_path(cp, r)));
  fam.t_max = 0.5;
  read_interval(v, fam.t_min, fam.t_max, where);
  return fam;
}

template <Scalar T> AssocAlgebra<T> algebra(const json &v, const std::string &where = "$") {
  only_keys(v, {"dim", "m", "unit"}, where);
  const auto n = count(field(v, "dim", where), key_path(where, "dim"));
  std::optional<Vector<T>> unit;
  if (const json *u = optional_field(v, "unit")) unit = vector<T>(*u, n, key_path(where, "unit"));
  return AssocAlgebra<T>(n, tensor3<T>(field(v, "m", where), n, key_path(where, "m")), unit);
}

template <Scalar T> HochschildCochain<T> product_cochain(const json &v, std::size_t n, const std::string &where) {
  return AssocAlgebra<T>(n, tensor3<T>(v, n, where)).product();
}

/// {"order": N, "coeffs": [c_1, ..., c_N]}.
template <Scalar T> FormalDeformation<T> formal_deformation(const json &v, std::size_t n, const std::string &where = "$") {
  only_keys(v, {"order", "coeffs"}, where);
  const auto N = count(field(v, "order", where), key_path(where, "order"));
  const auto &cj = field(v, "coeffs", where);
  const auto cp = key_path(where, "coeffs");
  require_array(cj, cp);
  if (cj.size() != N) fail(cp, "expected " + std::to_string(N) + " coefficients (one per order), got " + std::to_string(cj.size()));
  FormalDeformation<T> def;
  for (std::size_t r = 0; r < N; ++r) def.coeffs.push_back(product_cochain<T>(cj[r], n, index_path(cp, r)));
  return def;
}

/// {"coeffs": [M_0, M_1, ...], "t_max": x} with M_0 the base product.
template <Scalar T> ProductFamily<T> product_family(const json &v, std::size_t n, const std::string &where = "$") {
  only_keys(v, {"coeffs", "t_min", "t_max"}, where);
  const auto &cj = field(v, "coeffs", where);
  const auto cp = key_path(where, "coeffs");
  require_array(cj, cp);
  if (cj.empty()) fail(cp, "expected at least the base product");
  ProductFamily<T> fam;
  for (std::size_t r = 0; r < cj.size(); ++r) fam.coeffs.push_back(product_cochain<T>(cj[r], n, index_path(cp, r)));
  fam.t_max = 0.5;
  read_interval(v, fam.t_min, fam.t_max, where);
  return fam;
}

template <Scalar T> FiniteMetricSpace<T> metric_space(const json &v, const std::string &where = "$") {
  only_keys(v, {"n", "rho"}, where);
  const auto n = count(field(v, "n", where), key_path(where, "n"));
  return FiniteMetricSpace<T>(matrix<T>(field(v, "rho", where), n, n, key_path(where, "rho"), "the distance matrix"));
}

/// Series probe: a cochain complex, the degree k, a perturbation and a
/// cocycle v of b + delta in degree k.
struct SeriesBundle {
  Complex<double> C;
  int k = 0;
  GradedMap<double> delta;
  RealVector v;
};

inline SeriesBundle series_bundle(const json &v, const std::string &where = "$") {
  only_keys(v, {"complex", "degree", "delta", "v"}, where);
  SeriesBundle s;
  s.C = complex<double>(field(v, "complex", where), key_path(where, "complex"));
  s.k = stored_degree(static_cast<int>(integer(field(v, "degree", where), key_path(where, "degree"))), s.C.orientation());
  s.delta = perturbation<double>(field(v, "delta", where), s.C, key_path(where, "delta"));
  s.v = vector<double>(field(v, "v", where), static_cast<std::size_t>(s.C.dim(s.k)), key_path(where, "v"));
  return s;
}

// Writers. Rationals become "p/q" strings, doubles JSON numbers.

template <Scalar T> json to_json(const T &x) {
  if constexpr (is_exact_v<T>) return x.str();
  else return x;
}

template <Scalar T> json to_json(const Matrix<T> &m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <Scalar T> json to_json(const Vector<T> &v) {
  json out = json::array();
  for (const auto &x : v) out.push_back(to_json(x));
  return out;
}

inline json to_json(const GradedModule &m, Orientation o) {
  json out = json::object();
  for (auto [k, n] : m.dims()) out[std::to_string(stored_degree(k, o))] = n;
  return out;
}

template <Scalar T> json blocks_json(const GradedMap<T> &f, Orientation o) {
  json out = json::object();
  for (const auto &[k, m] : f.blocks()) out[std::to_string(stored_degree(k, o))] = to_json(m);
  return out;
}

template <Scalar T> json to_json(const GradedMap<T> &f, Orientation o) {
  return {{"shift", o == Orientation::Chain ? -f.shift() : f.shift()}, {"blocks", blocks_json(f, o)}};
}

template <Scalar T> json to_json(const Complex<T> &c) {
  const auto o = c.orientation();
  return {{"orientation", o == Orientation::Chain ? "chain" : "cochain"},
          {"dims", to_json(c.module(), o)},
          {"d", blocks_json(c.d(), o)}};
}

template <Scalar T> json to_json(const HEData<T> &he) {
  const auto o = he.L.orientation();
  return {{"L", to_json(he.L)}, {"M", to_json(he.M)}, {"i", to_json(he.i, o)}, {"p", to_json(he.p, o)},
          {"h", to_json(he.h, o)}};
}

inline json to_json(const Report &r, Orientation o = Orientation::Cochain) {
  json out = json::array();
  for (const auto &c : r.checks)
    out.push_back({{"name", c.name}, {"degree", stored_degree(c.degree, o)}, {"residual_norm", c.residual}, {"ok", c.ok}});
  return out;
}

// Reports.

inline std::string error_kind(const std::exception &e) {
  const std::string w = e.what();
  const auto colon = w.find(':');
  return colon == std::string::npos ? "Error" : w.substr(0, colon);
}

/// Report fields and exit code for an exception escaping a pipeline:
/// 1 for unreadable or malformed input, 2 for mathematical failures.
inline std::pair<json, int> error_report(const std::exception &e) {
  const bool input = dynamic_cast<const IoError *>(&e) || dynamic_cast<const SchemaError *>(&e);
  const bool library = dynamic_cast<const Error *>(&e);
  json r = {{"status", input || !library ? "error" : "fail"}, {"error", error_kind(e)}, {"message", e.what()}};
  if (const auto *rv = dynamic_cast<const RelationViolation *>(&e)) {
    r["relation"] = rv->relation();
    r["degree"] = rv->degree();
  }
  if (const auto *ns = dynamic_cast<const NotSmall *>(&e); ns && ns->radius() >= 0.0) r["radius"] = ns->radius();
  if (const auto *de = dynamic_cast<const DefectExceeded *>(&e)) {
    json rows = json::array();
    for (std::size_t s = 0; s < de->grid().size() && s < de->defects().size(); ++s)
      rows.push_back({{"t", de->grid()[s]}, {"defect", de->defects()[s]}});
    r["profile"] = rows;
  }
  return {r, input || !library ? 1 : 2};
}

} // namespace perturba::io
