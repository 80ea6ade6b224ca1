#include <gtest/gtest.h>

#include "oracles.hpp"
#include "perturba/random.hpp"

using namespace perturba;
using Q = Rational;

namespace {

GradedModule mod(std::map<int, int> d) { return GradedModule(d); }

GradedMap<Q> random_map(Rng &rng, const GradedModule &s, const GradedModule &t, int shift) {
  GradedMap<Q> f(s, t, shift);
  for (auto [k, n] : s.dims())
    if (t.dim(k + shift) > 0) f.set_block(k, rng.matrix<Q>(t.dim(k + shift), n, 3, 2));
  return f;
}

} // namespace

TEST(GradedMap, ComposeIdentityAndOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = mod({{0, rng.integer(1, 4)}, {1, rng.integer(1, 4)}, {2, rng.integer(0, 4)}});
    auto b = mod({{0, rng.integer(1, 4)}, {1, rng.integer(1, 4)}, {2, rng.integer(1, 4)}, {3, 2}});
    auto c = mod({{1, rng.integer(1, 4)}, {2, rng.integer(1, 4)}, {3, rng.integer(1, 4)}});
    auto g = random_map(rng, a, b, 1);
    auto f = random_map(rng, b, c, 0);
    auto fg = compose(f, g);
    EXPECT_EQ(fg.shift(), 1);
    for (auto [k, n] : a.dims())
      EXPECT_EQ(fg.block(k), oracle::naive_product(f.block(k + 1), g.block(k))) << "degree " << k;
    EXPECT_TRUE(equal(compose(identity<Q>(b), g), g));
    // Associativity, bit-exact.
    auto e = random_map(rng, c, c, -1);
    EXPECT_TRUE(equal(compose(e, compose(f, g)), compose(compose(e, f), g)));
  }
}

TEST(GradedMap, AddScale) {
  Rng rng(22);
  auto m = mod({{0, 2}, {1, 3}});
  auto f = random_map(rng, m, m, 1);
  EXPECT_TRUE((f + Q(-1) * f).is_zero());
  EXPECT_TRUE((Q(0) * f).is_zero());
  auto g = random_map(rng, m, m, 1);
  auto s = f + g;
  for (int k : {0, 1})
    for (std::size_t r = 0; r < s.block(k).rows(); ++r)
      for (std::size_t c = 0; c < s.block(k).cols(); ++c)
        EXPECT_EQ(s.block(k)(r, c), f.block(k)(r, c) + g.block(k)(r, c));
}

TEST(GradedMap, ShapeMismatch) {
  auto a = mod({{0, 2}}), b = mod({{0, 3}});
  GradedMap<Q> f(a, a, 0), g(b, b, 0);
  EXPECT_THROW(compose(f, g), ShapeMismatch);
  EXPECT_THROW(add(f, g), ShapeMismatch);
  EXPECT_THROW(f.set_block(0, Matrix<Q>(3, 2)), ShapeMismatch);
}

TEST(Complex, IsComplex) {
  auto m = mod({{0, 1}, {1, 1}, {2, 1}});
  EXPECT_TRUE(is_complex(Complex<Q>::zero(m)));
  auto two = mod({{0, 2}, {1, 2}});
  GradedMap<Q> d2(two, two, 1);
  d2.set_block(0, Matrix<Q>::identity(2));
  EXPECT_TRUE(is_complex(Complex<Q>(two, d2)));
  GradedMap<Q> d(m, m, 1);
  d.set_block(0, Matrix<Q>{{1}});
  d.set_block(1, Matrix<Q>{{1}});
  EXPECT_FALSE(is_complex(Complex<Q>(m, d)));
}

TEST(Complex, CohomologySmallCases) {
  auto c = Complex<Q>::zero(mod({{0, 2}, {1, 3}, {2, 2}}));
  EXPECT_EQ(cohomology_basis(c, 1).dim, 3);
  auto m = mod({{0, 1}, {1, 2}});
  GradedMap<Q> d(m, m, 1);
  d.set_block(0, Matrix<Q>{{1}, {0}});
  Complex<Q> c2(m, d);
  EXPECT_EQ(cohomology_basis(c2, 0).dim, 0);
  EXPECT_EQ(cohomology_basis(c2, 1).dim, 1);
}

TEST(Complex, ChainOrientationReindexes) {
  // C_1 -> C_0 with d = [[1],[0]].
  auto c = Complex<Q>::from_chain({{0, 2}, {1, 1}}, {{1, Matrix<Q>{{1}, {0}}}});
  EXPECT_EQ(c.orientation(), Orientation::Chain);
  EXPECT_EQ(c.dim(-1), 1);
  EXPECT_EQ(cohomology_basis(c, 0).dim, 1); // H_0
  EXPECT_EQ(cohomology_basis(c, -1).dim, 0);
}

TEST(Complex, RandomCohomologyMatchesConstruction) {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    std::map<int, int> coh, ranks;
    for (int k = 0; k < 4; ++k) {
      coh[k] = rng.integer(0, 2);
      ranks[k] = rng.integer(0, 2);
    }
    ranks[3] = 0;
    auto rc = random_complex<Q>(rng, coh, ranks);
    ASSERT_TRUE(is_complex(rc.complex));
    for (int k = 0; k < 4; ++k) {
      auto hk = cohomology_basis(rc.complex, k);
      EXPECT_EQ(hk.dim, coh[k]);
      // rank-nullity through the oracle.
      const auto rin = oracle::rank_q(rc.complex.d().block(k - 1));
      const auto rout = oracle::rank_q(rc.complex.d().block(k));
      EXPECT_EQ(static_cast<int>(rin) + hk.dim + static_cast<int>(rout), rc.complex.dim(k));
      for (std::size_t j = 0; j < hk.representatives.cols(); ++j) {
        auto v = hk.representatives.column(j);
        EXPECT_TRUE(is_zero_vector(rc.complex.d().block(k) * v));
        EXPECT_FALSE(hk.is_coboundary(v));
      }
    }
  }
}

TEST(Complex, ChainMapsAndQuasiIsos) {
  Rng rng(24);
  auto rc = random_complex<Q>(rng, {{0, 1}, {1, 1}}, {{0, 1}, {1, 1}});
  const auto &c = rc.complex;
  EXPECT_TRUE(is_chain_map(identity<Q>(c.module()), c, c));
  EXPECT_TRUE(is_chain_map(GradedMap<Q>(c.module(), c.module(), 0), c, c));
  EXPECT_TRUE(is_quasi_iso(identity<Q>(c.module()), c, c));
  EXPECT_TRUE(is_chain_map(rc.i, rc.cohomology, c));
  EXPECT_TRUE(is_quasi_iso(rc.i, rc.cohomology, c));
  EXPECT_TRUE(is_quasi_iso(rc.p, c, rc.cohomology));
  EXPECT_THROW(is_quasi_iso(GradedMap<Q>(c.module(), c.module(), 1), c, c), ShapeMismatch);

  // 0 -> contractible two-term complex.
  auto two = mod({{0, 1}, {1, 1}});
  GradedMap<Q> d(two, two, 1);
  d.set_block(0, Matrix<Q>{{1}});
  Complex<Q> contr(two, d);
  auto zero = Complex<Q>::zero(GradedModule{});
  EXPECT_TRUE(is_quasi_iso(GradedMap<Q>(zero.module(), two, 0), zero, contr));
  auto one = Complex<Q>::zero(mod({{0, 1}}));
  EXPECT_FALSE(is_quasi_iso(GradedMap<Q>(zero.module(), one.module(), 0), zero, one));

  // Direct recomputation on a non-commuting map.
  GradedMap<Q> f(c.module(), c.module(), 0);
  for (auto [k, n] : c.module().dims()) f.set_block(k, rng.matrix<Q>(n, n, 2));
  const bool direct = equal(compose(c.d(), f), compose(f, c.d()));
  EXPECT_EQ(is_chain_map(f, c, c), direct);
}

TEST(Complex, Homotopy) {
  auto two = mod({{0, 1}, {1, 1}});
  GradedMap<Q> d(two, two, 1), h(two, two, -1);
  d.set_block(0, Matrix<Q>{{2}});
  h.set_block(1, Matrix<Q>{{Q(1, 2)}});
  Complex<Q> c(two, d);
  // id - 0 = dh + hd with h = d^{-1}.
  EXPECT_TRUE(is_homotopy(h, identity<Q>(two), GradedMap<Q>(two, two, 0), c, c));
  EXPECT_TRUE(is_homotopy(GradedMap<Q>(two, two, -1), identity<Q>(two), identity<Q>(two), c, c));
  Rng rng(25);
  auto rc = random_complex<Q>(rng, {{0, 1}, {1, 2}}, {{0, 2}, {1, 1}});
  auto he = rc.he();
  EXPECT_TRUE(is_homotopy(he.h, compose(he.i, he.p), identity<Q>(he.M.module()), he.M, he.M));
  EXPECT_FALSE(is_homotopy(-he.h, compose(he.i, he.p), identity<Q>(he.M.module()), he.M, he.M));
}
