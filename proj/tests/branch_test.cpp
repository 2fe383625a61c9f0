#include "renorm/branch.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "renorm/error.hpp"
#include "test_util.hpp"

namespace renorm {
namespace {

using testing::random_chain;
using testing::uniform;

// Second derivative of a composition by the explicit sum over pieces:
// f_n'' = sum_k (f_{k-1}')^2 (phi_k'' o f_{k-1}) (phi_n o ... o phi_{k+1})' o f_k.
double lemma_sum_second_derivative(const Chain& chain, double x) {
  const auto pieces = chain.pieces();
  const std::size_t n = pieces.size();
  std::vector<double> value(n + 1), dprefix(n + 1);
  std::vector<Jet<double>> local(n);
  value[0] = x;
  dprefix[0] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    local[k] = eval_piece<double>(pieces[k], value[k]);
    value[k + 1] = local[k].v;
    dprefix[k + 1] = dprefix[k] * local[k].d1;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double tail = 1.0;  // derivative of the pieces after k, at value[k+1]
    for (std::size_t j = k + 1; j < n; ++j) tail *= local[j].d1;
    total += dprefix[k] * dprefix[k] * local[k].d2 * tail;
  }
  return total;
}

TEST(BranchTest, EvalExamples) {
  const auto id = BranchFunction::identity({0.0, 1.0});
  EXPECT_EQ(id.eval(0.4, 2), 0.0);
  EXPECT_EQ(id.eval(0.4, 1), 1.0);
  const BranchFunction aff({0.0, 1.0}, Chain({AffinePiece{2.0, 0.0}, AffinePiece{3.0, 1.0}}));
  for (double x : {0.0, 0.25, 1.0}) EXPECT_DOUBLE_EQ(aff.eval(x, 1), 6.0);
  EXPECT_THROW((void)aff.eval(1.5), Error);
}

TEST(BranchTest, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const BranchFunction f = random_chain(rng, 6);
    for (int i = 0; i < 5; ++i) {
      const double x = uniform(rng, 0.05, 0.95);
      const long double h = 1e-5L;
      const long double xl = x;
      const long double fp = f.jet<long double>(xl + h).v;
      const long double f0 = f.jet<long double>(xl).v;
      const long double fm = f.jet<long double>(xl - h).v;
      const double d1 = static_cast<double>((fp - fm) / (2 * h));
      const double d2 = static_cast<double>((fp - 2 * f0 + fm) / (h * h));
      const Jet<double> j = f.jet(x);
      EXPECT_LT(std::fabs(j.d1 - d1), 1e-6 * std::fabs(j.d1)) << "trial " << trial;
      EXPECT_LT(std::fabs(j.d2 - d2), 1e-6 * std::max(1.0, std::fabs(j.d2))) << "trial " << trial;
      // The recursion and the explicit sum agree.
      EXPECT_NEAR(lemma_sum_second_derivative(f.chain(), x), j.d2,
                  1e-10 * std::max(1.0, std::fabs(j.d2)));
    }
  }
}

TEST(BranchTest, ChainRuleConsistency) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const BranchFunction f = random_chain(rng, 8);
    const double x = uniform(rng, 0.0, 1.0);
    double y = x, product = 1.0;
    for (const Piece& p : f.chain().pieces()) {
      const Jet<double> j = eval_piece<double>(p, y);
      product *= j.d1;
      y = j.v;
    }
    EXPECT_NEAR(f.eval(x, 1), product, 1e-10 * product);
  }
}

TEST(BranchTest, ComposeMoebiusWithInverseIsIdentityPiece) {
  std::mt19937_64 rng(13);
  const Moebius m = testing::random_interval_moebius(rng, {0.0, 1.0}, {0.3, 2.0});
  const auto f = BranchFunction::moebius({0.0, 1.0}, m);
  const auto g = BranchFunction::moebius({0.3, 2.0}, m.inverse());
  const BranchFunction fs[] = {f, g};
  const auto h = compose_chain(fs);
  ASSERT_TRUE(h.is_moebius());
  EXPECT_TRUE(h.as_moebius().is_identity());
}

TEST(BranchTest, ComposeTwoMoebiusIsMatrixProduct) {
  std::mt19937_64 rng(14);
  const Moebius m1 = testing::random_interval_moebius(rng, {0.0, 1.0}, {1.0, 3.0});
  const Moebius m2 = testing::random_interval_moebius(rng, {1.0, 3.0}, {-1.0, 0.0});
  const BranchFunction fs[] = {BranchFunction::moebius({0.0, 1.0}, m1),
                               BranchFunction::moebius({1.0, 3.0}, m2)};
  const auto h = compose_chain(fs);
  ASSERT_EQ(h.chain().size(), 1u);
  EXPECT_LT(h.as_moebius().distance(m2 * m1), 1e-13);
}

TEST(BranchTest, ComposeAssociative) {
  std::mt19937_64 rng(15);
  const BranchFunction a = random_chain(rng, 4);
  const Interval ca = a.codomain();
  const BranchFunction b = BranchFunction(ca, Chain({PerturbPiece{0.05, 1, ca.lo, ca.hi},
                                                     AffinePiece{0.5, 0.1}}));
  const Interval cb = b.codomain();
  const BranchFunction c = BranchFunction::moebius(
      cb, testing::random_interval_moebius(rng, cb, {0.0, 1.0}));
  const auto left = then(then(a, b), c);
  const auto right = then(a, then(b, c));
  for (double x : chebyshev_grid({0.0, 1.0}, 33)) {
    EXPECT_NEAR(left.eval(x), right.eval(x), 1e-11);
  }
}

TEST(BranchTest, ComposeRejectsMismatch) {
  const BranchFunction fs[] = {BranchFunction::affine({0.0, 1.0}, 2.0, 0.0),
                               BranchFunction::identity({0.0, 1.0})};
  try {
    (void)compose_chain(fs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainMismatch);
  }
}

TEST(BranchTest, PiecewiseComposeSplitsSegments) {
  // A two-segment outer map forces a split of the inner segment.
  const BranchFunction inner = BranchFunction::affine({0.0, 1.0}, 1.0, 0.0);
  const BranchFunction outer(std::vector<Segment>{
      {{0.0, 0.5}, Chain({AffinePiece{0.5, 0.0}})},
      {{0.5, 1.0}, Chain({AffinePiece{1.5, -0.5}})}});
  const auto h = then(inner, outer);
  EXPECT_EQ(h.segments().size(), 2u);
  EXPECT_NEAR(h.eval(0.25), 0.125, 1e-15);
  EXPECT_NEAR(h.eval(0.75), 0.625, 1e-15);
  EXPECT_NEAR(h.inverse(0.625), 0.75, 1e-15);
}

TEST(BranchTest, NormaliseExamples) {
  std::mt19937_64 rng(16);
  const Moebius m = moebius_through({0.0, 0.5, 1.0}, {0.0, 0.3, 1.0});
  const auto f = BranchFunction::moebius({0.0, 1.0}, m);
  const auto nf = normalise(f);
  for (double x : chebyshev_grid({0.0, 1.0}, 17)) EXPECT_NEAR(nf.eval(x), f.eval(x), 1e-15);

  const auto aff = normalise(BranchFunction::affine({2.0, 5.0}, 0.7, -3.0));
  for (double x : chebyshev_grid({0.0, 1.0}, 17)) {
    EXPECT_NEAR(aff.eval(x), x, 1e-14);
    EXPECT_NEAR(aff.eval(x, 1), 1.0, 1e-14);
  }
}

TEST(BranchTest, NormalisedSecondDerivativeBound) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = uniform(rng, 0.0, 0.5);
    const BranchFunction f = random_chain(rng, 6).restrict({lo, lo + uniform(rng, 0.1, 0.5)});
    const IntervalNorms n = norms(f);
    const IntervalNorms nn = norms(normalise(f));
    EXPECT_LE(nn.sup_d2, 1.01 * (1.0 / n.inf_d1) * n.sup_d2 * f.domain().length())
        << "trial " << trial;
  }
}

TEST(BranchTest, NormsExamples) {
  const IntervalNorms id = norms(BranchFunction::identity({0.0, 1.0}));
  EXPECT_EQ(id.sup_d2, 0.0);
  EXPECT_EQ(id.log_d1_variation, 0.0);
  const IntervalNorms aff = norms(BranchFunction::affine({1.0, 3.0}, 0.3, 2.0));
  EXPECT_EQ(aff.log_d1_variation, 0.0);
  EXPECT_DOUBLE_EQ(aff.inf_d1, 0.3);
  EXPECT_DOUBLE_EQ(aff.sup_d1, 0.3);
  for (double c : {0.1, 1.0, 4.0}) {
    const IntervalNorms m = norms(BranchFunction::moebius({0.0, 1.0}, Moebius(1.0, 0.0, c, 1.0)));
    EXPECT_NEAR(m.log_d1_variation, 2.0 * std::log1p(c), 1e-9);
  }
}

TEST(BranchTest, CrossRatioDistortion) {
  std::mt19937_64 rng(18);
  const std::array<double, 4> q{0.1, 0.3, 0.35, 0.9};
  for (int i = 0; i < 20; ++i) {
    const auto f = BranchFunction::moebius(
        {0.0, 1.0}, testing::random_interval_moebius(rng, {0.0, 1.0}, {-2.0, 7.0}));
    EXPECT_NEAR(cross_ratio_distortion(f, q), 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(cross_ratio_distortion(BranchFunction::identity({0.0, 1.0}), q), 1.0);

  // A bump on [0.5, 1]: distortion by direct arithmetic.
  const PerturbPiece bump{0.05, 0, 0.5, 1.0};
  const BranchFunction f({0.5, 1.0}, Chain({bump}));
  const std::array<double, 4> quad{0.5, 0.6, 0.7, 0.8};
  auto g = [&](double x) {
    const double u = (x - 0.5) / 0.5;
    return x + 0.05 * 0.5 * 256.0 * std::pow(u, 4) * std::pow(1 - u, 4);
  };
  const double y0 = g(0.5), y1 = g(0.6), y2 = g(0.7), y3 = g(0.8);
  const double expected = ((y2 - y0) * (y3 - y1)) / ((y2 - y1) * (y3 - y0)) /
                          (((0.2) * (0.2)) / ((0.1) * (0.3)));
  EXPECT_NEAR(cross_ratio_distortion(f, quad), expected, 1e-13);
  EXPECT_GT(std::fabs(expected - 1.0), 1e-4);
}

TEST(BranchProperty, MoebiusChainsPreserveCrossRatio) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    Chain c;
    Interval cur{0.0, 1.0};
    for (int k = 0; k < 5; ++k) {
      const Interval to{uniform(rng, -1.0, 0.0), uniform(rng, 1.0, 2.0)};
      c.push_back(MoebiusPiece{testing::random_interval_moebius(rng, cur, to)});
      cur = to;
    }
    const BranchFunction f({0.0, 1.0}, c);
    std::array<double, 4> q{};
    for (auto& v : q) v = uniform(rng, 0.0, 1.0);
    std::sort(q.begin(), q.end());
    EXPECT_NEAR(cross_ratio_distortion(f, q), 1.0, 1e-10);
  }
}

TEST(BranchTest, InverseRoundTrip) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const BranchFunction f = random_chain(rng, 6);
    const double x = uniform(rng, 0.0, 1.0);
    EXPECT_NEAR(f.inverse(f.eval(x)), x, 1e-11);
  }
}

TEST(BranchTest, InvertedBumpUndoesBump) {
  for (int shape = 0; shape < kBumpShapeCount; ++shape) {
    const PerturbPiece fwd{0.3 / bump_max_slope(shape), shape, 0.2, 0.9};
    PerturbPiece inv = fwd;
    inv.inverted = true;
    const BranchFunction round({0.0, 1.0}, Chain({fwd, inv}));
    const BranchFunction back({0.0, 1.0}, Chain({inv}));
    for (double x : chebyshev_grid({0.0, 1.0}, 21)) {
      const Jet<double> j = round.jet(x);
      EXPECT_NEAR(j.v, x, 1e-15);
      EXPECT_NEAR(j.d1, 1.0, 1e-13);
      EXPECT_NEAR(j.d2, 0.0, 1e-11);
      const long double h = 1e-5L, xl = x;
      if (x < h || x > 1 - h) continue;
      const long double fp = back.jet<long double>(xl + h).v, fm = back.jet<long double>(xl - h).v;
      const long double f0 = back.jet<long double>(xl).v;
      EXPECT_NEAR(back.jet(x).d1, static_cast<double>((fp - fm) / (2 * h)), 1e-8);
      EXPECT_NEAR(back.jet(x).d2, static_cast<double>((fp - 2 * f0 + fm) / (h * h)), 1e-6);
      EXPECT_NEAR(back.inverse(back.eval(x)), x, 1e-15);
    }
  }
}

TEST(BranchTest, MonotonicityGuard) {
  EXPECT_THROW((void)Chain({PerturbPiece{1.0, 0, 0.0, 1.0}}), Error);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) EXPECT_TRUE(random_chain(rng, 6).is_increasing());
}

}  // namespace
}  // namespace renorm
