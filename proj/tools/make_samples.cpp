// Writes the bundles under samples/ from seeded random instances.

#include <fstream>

#include "generators.hpp"
#include "io.hpp"

using namespace perturba;
using io::json;
using Q = Rational;

namespace {

void save(const std::string &name, const json &j) { std::ofstream(PERTURBA_SAMPLES_DIR + name) << j.dump(1) << "\n"; }

template <Scalar T> json tensor(const std::vector<T> &c, std::size_t n) {
  json out = json::array();
  for (std::size_t k = 0; k < n; ++k) {
    Matrix<T> m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = c[(k * n + i) * n + j];
    out.push_back(io::to_json(m));
  }
  return out;
}

json cochain_tensor(const HochschildCochain<Q> &mu) { return tensor(AssocAlgebra<Q>::from_product(mu).m, mu.n); }

json algebra(const AssocAlgebra<Q> &A) {
  json j = {{"dim", A.n}, {"m", tensor(A.m, A.n)}};
  if (A.unit) j["unit"] = io::to_json(*A.unit);
  return j;
}

json dims(const std::map<int, int> &m) {
  json o = json::object();
  for (auto [k, v] : m) o[std::to_string(k)] = v;
  return o;
}

json mats(const std::map<int, Matrix<Q>> &m) {
  json o = json::object();
  for (const auto &[k, v] : m) o[std::to_string(k)] = io::to_json(v);
  return o;
}

void he_samples(Rng &rng) {
  for (;;) {
    auto he = random_he<Q>(rng, {{0, 1}, {1, 1}, {2, 0}}, {{0, 1}, {1, 1}});
    auto delta = random_conjugation_perturbation<Q>(rng, he.M, Q(1, 3));
    try {
      certify_smallness(delta, he.h);
    } catch (const NotSmall &) {
      continue;
    }
    if (delta.is_zero()) continue;
    save("he.json", io::to_json(he));
    save("delta.json", io::to_json(delta, Orientation::Cochain));
    auto broken = he;
    auto hb = broken.h.block(1);
    hb(0, 0) += Q(1);
    broken.h.set_block(1, hb);
    save("he_broken.json", io::to_json(broken));
    json bad = io::to_json(delta, Orientation::Cochain);
    auto &blk = bad["blocks"].begin().value();
    blk.erase(blk.size() - 1);
    save("delta_bad_shape.json", bad);
    return;
  }
}

void construction_samples(Rng &rng) {
  auto dc = gen::random_double_complex(rng, 2, 2);
  while (contract_rows(dc, build_row_contraction(dc)).dr.L.module().total_dim() < 2)
    dc = gen::random_double_complex(rng, 2, 2);
  json dj = {{"dims", json::object()}, {"horizontal", json::object()}, {"vertical", json::object()}};
  for (const auto &[b, n] : dc.dims()) {
    const auto key = std::to_string(b.first) + "," + std::to_string(b.second);
    dj["dims"][key] = n;
    if (b.first > 0) dj["horizontal"][key] = io::to_json(dc.horizontal(b.first, b.second));
    dj["vertical"][key] = io::to_json(dc.vertical(b.first, b.second));
  }
  save("double_complex.json", dj);
  const auto bc = gen::random_block_complex(rng, 2);
  save("block_complex.json", {{"dims_a", dims(bc.dim_a)}, {"dims_b", dims(bc.dim_b)}, {"alpha", mats(bc.alpha)},
                              {"beta", mats(bc.beta)}, {"gamma", mats(bc.gamma)}, {"delta", mats(bc.delta)},
                              {"H", mats(bc.H)}});
}

void lie_samples() {
  const auto g = sl2<Q>();
  save("sl2.json", {{"dim", g.n}, {"c", tensor(g.c, 3)}});
  save("lie_scaling.json", {{"coeffs", {tensor(g.c, 3), tensor(g.c, 3)}}, {"t_max", "1/2"}});
  Matrix<Q> N(3, 3);
  N(0, 1) = Q(1, 2);
  N(1, 2) = Q(-1);
  N(0, 2) = Q(1, 3);
  json cj = json::array();
  for (const auto &b : conjugation_family(g, N).coeffs) cj.push_back(tensor(b.c, 3));
  save("lie_conjugation.json", {{"coeffs", cj}, {"t_max", 0.5}});
  // The abelian plane: H^2 is all of C^2.
  const auto ab = LieAlgebra<Q>::zero(2);
  save("abelian2.json", {{"dim", 2}, {"c", tensor(ab.c, 2)}});
  save("abelian2_constant.json", {{"coeffs", {tensor(ab.c, 2)}}, {"t_max", 0.5}});
}

void hochschild_samples(Rng &rng) {
  const auto M2 = matrix_algebra<Q>(2);
  save("m2.json", algebra(M2));
  std::vector<Matrix<Q>> gauge;
  for (int k = 0; k < 3; ++k) gauge.push_back(rng.matrix<Q>(4, 4, 1));
  json fj = json::array();
  for (const auto &c : gauge_deformation(M2, gauge, 3).coeffs) fj.push_back(cochain_tensor(c));
  save("m2_formal.json", {{"order", 3}, {"coeffs", fj}});
  Matrix<Q> X(4, 4);
  X(0, 1) = Q(1, 2);
  X(1, 3) = Q(-1, 2);
  X(2, 3) = Q(1);
  json pj = json::array();
  for (const auto &c : product_conjugation_family(M2, X).coeffs) pj.push_back(cochain_tensor(c));
  save("m2_family.json", {{"coeffs", pj}, {"t_max", 0.5}});
  // Q[x]/(x^2 - t): not isomorphic to the dual numbers for t != 0.
  const auto dual = dual_numbers<Q>();
  save("dual.json", algebra(dual));
  HochschildCochain<Q> c(2, 2);
  c.at(1 * 2 + 1, 0) = Q(1);
  save("dual_family.json", {{"coeffs", {cochain_tensor(dual.product()), cochain_tensor(c)}}, {"t_max", 0.5}});
}

void other_samples() {
  save("metric2.json", {{"n", 2}, {"rho", {{0, "3/2"}, {"3/2", 0}}}});
  save("metric3.json", {{"n", 3}, {"rho", {{0, "1", "2"}, {"1", 0, "3/2"}, {"2", "3/2", 0}}}});
  // Two-term model b = 1, delta = eps: w = 1 / (1 + eps), divergent for |eps| >= 1.
  const json C = {{"orientation", "cochain"}, {"dims", {{"0", 1}, {"1", 1}}}, {"d", {{"0", {{1}}}}}};
  save("series_scalar.json", {{"complex", C}, {"degree", 1}, {"delta", {{"blocks", {{"0", {{0.25}}}}}}}, {"v", {1.0}}});
  save("series_diverge.json", {{"complex", C}, {"degree", 1}, {"delta", {{"blocks", {{"0", {{-2.0}}}}}}}, {"v", {1.0}}});
  save("bad_rational.json", {{"L", {{"dims", {{"0", 1}}}}},
                             {"M", {{"dims", {{"0", 1}}}}},
                             {"i", {{"blocks", {{"0", {{"1/0"}}}}}}},
                             {"p", {{"blocks", {{"0", {{1}}}}}}},
                             {"h", {{"blocks", json::object()}}}});
  // Chain orientation: M_1 -> M_0 is the identity, L = 0.
  save("he_chain.json", {{"L", {{"orientation", "chain"}, {"dims", json::object()}}},
                         {"M", {{"orientation", "chain"}, {"dims", {{"0", 1}, {"1", 1}}}, {"d", {{"1", {{1}}}}}}},
                         {"i", {{"blocks", json::object()}}},
                         {"p", {{"blocks", json::object()}}},
                         {"h", {{"shift", 1}, {"blocks", {{"0", {{-1}}}}}}}});
}

} // namespace

int main() {
  Rng rng(7);
  he_samples(rng);
  construction_samples(rng);
  lie_samples();
  hochschild_samples(rng);
  other_samples();
}
