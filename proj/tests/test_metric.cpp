#include <gtest/gtest.h>

#include "perturba/metric.hpp"
#include "perturba/random.hpp"

using namespace perturba;
using Q = Rational;
using Tensor = FunctionTensor<Q>;

namespace {

/// Random rational metric: integer-over-small-denominator distances,
/// redrawn until the triangle inequality holds.
FiniteMetricSpace<Q> random_metric(Rng &rng, std::size_t n) {
  for (;;) {
    Matrix<Q> d(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = Q(rng.integer(1, 9), rng.integer(1, 4));
    FiniteMetricSpace<Q> ms(d);
    try {
      ms.validate();
      return ms;
    } catch (const AxiomViolation &) {
    }
  }
}

Tensor random_tensor(Rng &rng, std::size_t n, int k) {
  Tensor f(n, k);
  for (auto &x : f.v) x = rng.small<Q>(3, 2);
  return f;
}

Tensor random_normalized(Rng &rng, std::size_t n, int k) {
  auto f = normalize_project(random_tensor(rng, n, k));
  if (k == 2)
    for (std::size_t x = 0; x < n; ++x) f[{x, x}] = Q(0);
  return f;
}

FiniteMetricSpace<Q> two_points(Q d = Q(1)) { return FiniteMetricSpace<Q>(Matrix<Q>{{Q(0), d}, {d, Q(0)}}); }

} // namespace

TEST(MetricSpace, Validation) {
  Rng rng(201);
  EXPECT_NO_THROW(random_metric(rng, 4).validate());
  EXPECT_THROW(FiniteMetricSpace<Q>(Matrix<Q>{{Q(0), Q(1)}, {Q(2), Q(0)}}).validate(), AxiomViolation);
  EXPECT_THROW(FiniteMetricSpace<Q>(Matrix<Q>{{Q(0), Q(0)}, {Q(0), Q(0)}}).validate(), AxiomViolation);
  Matrix<Q> tri{{Q(0), Q(1), Q(5)}, {Q(1), Q(0), Q(1)}, {Q(5), Q(1), Q(0)}};
  EXPECT_THROW(FiniteMetricSpace<Q>(tri).validate(), AxiomViolation);
}

TEST(BPrime, ArityTwoIsDiagonal) {
  Rng rng(202);
  const auto f = random_tensor(rng, 3, 2);
  EXPECT_EQ(bprime(f), diagonal(f));
  EXPECT_THROW(bprime(Tensor(3, 1)), ArityViolation);
}

TEST(BPrime, ConstantFunction) {
  // Direct sums: arity 3 gives 1 - 1 = 0, arity 4 gives 1 - 1 + 1 = 1.
  Tensor one3(2, 3, Vector<Q>(8, Q(1))), one4(2, 4, Vector<Q>(16, Q(1)));
  EXPECT_EQ(bprime(one3), Tensor(2, 2));
  EXPECT_EQ(bprime(one4), Tensor(2, 3, Vector<Q>(8, Q(1))));
  EXPECT_EQ(bprime(one4, BPrimeSign::Signed), bprime(one4));
  EXPECT_EQ(bprime(one3, BPrimeSign::Signed), bprime(one3));
}

TEST(BPrime, SquaresToZeroAndKillsDiagonal) {
  Rng rng(203);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_tensor(rng, 3, 4);
    EXPECT_EQ(bprime(bprime(f)), Tensor(3, 2));
    const auto g = random_tensor(rng, 3, 3);
    EXPECT_EQ(diagonal(bprime(g)), Tensor(3, 1));
  }
}

TEST(BPrime, PreservesNormalization) {
  Rng rng(204);
  for (int k = 3; k <= 5; ++k) EXPECT_TRUE(is_normalized(bprime(random_normalized(rng, 3, k)))) << k;
}

TEST(Normalize, Cases) {
  Rng rng(205);
  const auto f = random_normalized(rng, 3, 4);
  EXPECT_EQ(normalize_project(f), f);
  const auto g = random_tensor(rng, 3, 4);
  EXPECT_EQ(normalize_project(normalize_project(g)), normalize_project(g));
  // Arity 3 on two points: only x0 = x1 is forced to vanish.
  const auto p = normalize_project(Tensor(2, 3, Vector<Q>(8, Q(1))));
  for (std::size_t idx = 0; idx < 8; ++idx) {
    const auto x = p.tuple(idx);
    EXPECT_EQ(p.v[idx], x[0] == x[1] ? Q(0) : Q(1));
  }
}

TEST(MetricH, HandEvaluationOnTwoPoints) {
  // Points a = 0, b = 1 at distance 1; f in ker m with f(a,b) = 3, f(b,a) = -2.
  const auto ms = two_points();
  Tensor f(2, 2);
  f[{0, 1}] = Q(3);
  f[{1, 0}] = Q(-2);
  const auto h = metric_h(f, ms);
  // h(f)(a, b, x2) = 1 / (1 + rho(b, x2)) f(a, x2).
  EXPECT_EQ((h[{0, 1, 0}]), Q(1, 2) * (f[{0, 0}]));
  EXPECT_EQ((h[{0, 1, 1}]), (f[{0, 1}]));
  EXPECT_EQ((h[{1, 0, 1}]), Q(1, 2) * (f[{1, 1}]));
  EXPECT_EQ((h[{1, 0, 0}]), (f[{1, 0}]));
  EXPECT_EQ((h[{0, 0, 1}]), Q(0));
  EXPECT_EQ((h[{1, 1, 0}]), Q(0));
}

TEST(MetricH, DomainAndZero) {
  const auto ms = two_points(Q(2));
  Tensor diag(2, 2);
  diag[{0, 0}] = Q(1);
  EXPECT_THROW(metric_h(diag, ms), DomainViolation);
  EXPECT_EQ(metric_h(Tensor(2, 2), ms), Tensor(2, 3));
  EXPECT_EQ(metric_h_general(Tensor(2, 5), ms), Tensor(2, 6));
  EXPECT_THROW(metric_h(Tensor(2, 5), ms), ArityViolation);
  Tensor bad(2, 3);
  bad[{0, 0, 1}] = Q(1);
  EXPECT_THROW(metric_h(bad, ms), DomainViolation);
}

TEST(MetricH, DegenerateTuplesVanish) {
  Rng rng(206);
  const auto ms = random_metric(rng, 3);
  for (int k = 2; k <= 4; ++k) {
    const auto h = metric_h(random_normalized(rng, 3, k), ms);
    EXPECT_TRUE(is_normalized(h)) << k;
    for (std::size_t idx = 0; idx < h.v.size(); ++idx) {
      if (h.tuple(idx)[0] == h.tuple(idx)[1]) {
        EXPECT_EQ(h.v[idx], Q(0));
      }
    }
  }
}

TEST(MetricH, GeneralAgreesWithDisplayed) {
  Rng rng(207);
  for (std::size_t n : {2u, 3u, 4u}) {
    const auto ms = random_metric(rng, n);
    for (int k = 2; k <= 4; ++k) {
      const auto f = random_normalized(rng, n, k);
      EXPECT_EQ(metric_h_general(f, ms), metric_h(f, ms)) << "n = " << n << ", arity " << k;
    }
  }
}

TEST(MetricH, ContractionIdentityOnTensors) {
  // Direct check on random normalized tensors, independent of the form code
  // in verify_contraction.
  Rng rng(208);
  const auto ms = random_metric(rng, 3);
  const auto S = BPrimeSign::Signed;
  const auto f2 = random_normalized(rng, 3, 2);
  EXPECT_EQ(bprime(metric_h(f2, ms), S), f2);
  for (int k = 3; k <= 4; ++k) {
    const auto f = random_normalized(rng, 3, k);
    const auto lhs = bprime(metric_h(f, ms), S);
    const auto rhs = metric_h(bprime(f, S), ms);
    Tensor sum(3, k);
    for (std::size_t i = 0; i < sum.v.size(); ++i) sum.v[i] = lhs.v[i] + rhs.v[i];
    EXPECT_EQ(sum, f) << k;
  }
}

TEST(VerifyContraction, TwoPointsExhaustive) {
  const auto rep = verify_contraction(two_points(Q(3, 2)), 3);
  ASSERT_EQ(rep.degrees.size(), 2u);
  EXPECT_TRUE(rep.ok());
}

TEST(VerifyContraction, RandomMetricsThroughArityFive) {
  Rng rng(209);
  for (std::size_t n : {3u, 4u, 5u}) {
    const auto ms = random_metric(rng, n);
    const int top = n == 5 ? 4 : 5;
    const auto rep = verify_contraction(ms, top);
    for (const auto &d : rep.degrees) EXPECT_TRUE(d.ok()) << "n = " << n << ", arity " << d.arity;
  }
}

TEST(VerifyContraction, TypoReadingIsDecidedAtArityFive) {
  Rng rng(210);
  for (std::size_t n : {3u, 4u}) {
    const auto ms = random_metric(rng, n);
    MetricContractionOptions verb;
    verb.reading = HReading::Verbatim;
    const auto rv = verify_contraction(ms, 5, verb);
    const auto rc = verify_contraction(ms, 5);
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(rv.degrees[static_cast<std::size_t>(i)].ok()); // arities 2..4
    EXPECT_GT(rv.degrees[3].mismatches, 0u) << "n = " << n;
    EXPECT_TRUE(rc.degrees[3].ok());
  }
  // Two points cannot tell the readings apart.
  MetricContractionOptions verb;
  verb.reading = HReading::Verbatim;
  EXPECT_TRUE(verify_contraction(two_points(), 5, verb).ok());
}

TEST(VerifyContraction, AlternatingSignFailsOnNormalizedComplex) {
  Rng rng(211);
  MetricContractionOptions alt;
  alt.sign = BPrimeSign::Alternating;
  const auto rep = verify_contraction(random_metric(rng, 3), 4, alt);
  EXPECT_FALSE(rep.ok());
}

TEST(VerifyContraction, OnePointIsVacuous) {
  const FiniteMetricSpace<Q> one(Matrix<Q>{{Q(0)}});
  const auto rep = verify_contraction(one, 4);
  EXPECT_TRUE(rep.ok());
  for (const auto &d : rep.degrees) EXPECT_EQ(d.basis, 0u);
}

TEST(FunctionAlgebra, SmokeTrivialization) {
  Rng rng(212);
  const auto ms = random_metric(rng, 3);
  const auto A = function_algebra(ms);
  EXPECT_NO_THROW(require_assoc(A));
  const auto split = build_degree2_splitting(A);
  ASSERT_TRUE(split.ok());
  Matrix<Q> X(3, 3);
  X(0, 1) = Q(1, 2);
  X(1, 2) = Q(-1, 3);
  const auto fam = product_conjugation_family(A, X);
  const auto res = trivialize_product_family(fam, *split.splitting, {0.5, 50});
  EXPECT_LE(res.max_defect(), 1e-6);
}
