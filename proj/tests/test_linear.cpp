#include <gtest/gtest.h>

#include "oracles.hpp"
#include "perturba/random.hpp"

using namespace perturba;
using Q = Rational;

TEST(Rational, ParseForms) {
  EXPECT_EQ(Q::parse("3/6"), Q(1, 2));
  EXPECT_EQ(Q::parse("-2"), Q(-2));
  EXPECT_EQ(Q::parse("0.25"), Q(1, 4));
  EXPECT_EQ(Q::parse("-1.5"), Q(-3, 2));
  EXPECT_THROW(Q::parse("1/0"), SchemaError);
  EXPECT_THROW(Q::parse("abc"), SchemaError);
  EXPECT_THROW(Q::parse(""), SchemaError);
}

TEST(Rational, Arithmetic) {
  EXPECT_EQ(Q(1, 3) + Q(1, 6), Q(1, 2));
  EXPECT_EQ(Q(2, 3) * Q(3, 4), Q(1, 2));
  EXPECT_EQ((Q(1, 2) / Q(1, 4)).str(), "2");
  EXPECT_THROW(Q(1) / Q(0), Singular);
  EXPECT_LT(Q(-1, 2), Q(1, 3));
}

TEST(Tolerance, FloatComparison) {
  EXPECT_TRUE(approx_equal(1.0, 1.0 + 1e-10));
  EXPECT_FALSE(approx_equal(1.0, 1.0 + 1e-6));
  EXPECT_TRUE(approx_equal(1e6, 1e6 + 1e-4));
  EXPECT_FALSE(approx_equal(Q(1), Q(1) + Q(1, 1000000000)));
}

TEST(Matrix, ProductMatchesNaiveOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = rng.integer(1, 4), k = rng.integer(1, 4), c = rng.integer(1, 4);
    auto a = rng.matrix<Q>(r, k, 5, 3), b = rng.matrix<Q>(k, c, 5, 3);
    EXPECT_EQ(a * b, oracle::naive_product(a, b));
  }
  Matrix<Q> f{{1, 2}}, g{{3}, {4}};
  EXPECT_EQ(f * g, (Matrix<Q>{{11}}));
}

TEST(Matrix, RankKernelSolveInverse) {
  Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const auto r = rng.integer(1, 6), c = rng.integer(1, 6);
    // Low rank by construction.
    const auto inner = rng.integer(1, 3);
    auto a = rng.matrix<Q>(r, inner, 3) * rng.matrix<Q>(inner, c, 3);
    const auto rk = rank(a);
    EXPECT_EQ(rk, oracle::rank_q(a));
    auto ker = kernel_basis(a);
    EXPECT_EQ(ker.cols(), static_cast<std::size_t>(c) - rk);
    EXPECT_TRUE((a * ker).is_zero());
    Vector<Q> x(c);
    for (auto &v : x) v = rng.small<Q>(4);
    auto b = a * x;
    auto sol = solve(a, b);
    ASSERT_TRUE(sol.has_value());
    EXPECT_EQ(a * *sol, b);
    auto g = generalized_inverse(a);
    EXPECT_EQ(a * g * a, a);
    EXPECT_EQ(g * a * g, g);
  }
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = rng.integer(1, 5);
    auto a = rng.matrix<Q>(n, n, 3);
    auto inv = inverse(a);
    EXPECT_EQ(inv.has_value(), !oracle::det_q(a).is_zero());
    if (inv) {
      EXPECT_EQ(a * *inv, Matrix<Q>::identity(n));
    }
  }
}

TEST(Matrix, UnimodularHasDeterminantPlusMinusOne) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto u = rng.unimodular<Q>(rng.integer(1, 5));
    auto d = oracle::det_q(u);
    EXPECT_TRUE(d == Q(1) || d == Q(-1));
  }
}

TEST(Matrix, FloatRankAmbiguity) {
  Matrix<double> a{{1.0, 0.0}, {0.0, 5e-9}};
  EXPECT_THROW(rank(a), NumericRankAmbiguity);
  Matrix<double> b{{1.0, 0.0}, {0.0, 1e-12}};
  EXPECT_EQ(rank(b), 1u);
  Matrix<double> c{{1.0, 0.0}, {0.0, 1e-3}};
  EXPECT_EQ(rank(c), 2u);
}

TEST(Matrix, ShapeErrors) {
  Matrix<Q> a(2, 3), b(2, 3);
  EXPECT_THROW(a * b, ShapeMismatch);
  EXPECT_THROW(inverse(a), ShapeMismatch);
}

TEST(Matrix, SupOperatorNorm) {
  Matrix<double> a{{1.0, -2.0}, {0.5, 0.5}};
  EXPECT_DOUBLE_EQ(sup_operator_norm(a), 3.0);
}
