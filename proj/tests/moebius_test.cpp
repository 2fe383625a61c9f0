#include "renorm/moebius.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "renorm/error.hpp"
#include "test_util.hpp"

namespace renorm {
namespace {

using testing::random_hyperbolic;
using testing::random_moebius;
using testing::uniform;

TEST(MoebiusTest, ApplyExamples) {
  EXPECT_DOUBLE_EQ(Moebius::identity().apply(0.3), 0.3);
  const double lambda = std::sqrt(2.0);
  EXPECT_NEAR(Moebius::diagonal(lambda).apply(1.0), 2.0, 1e-15);
  const Moebius quarter(0.0, 1.0, -1.0, 0.0);
  EXPECT_EQ(quarter.apply(kInfinity), 0.0);
  EXPECT_TRUE(is_infinite(quarter.apply(0.0)));
}

TEST(MoebiusTest, ComposeAndInverse) {
  std::mt19937_64 rng(1);
  const Moebius m = random_moebius(rng);
  EXPECT_TRUE(m.compose(m.inverse()).is_identity());

  // Affine maps compose like x -> lambda mu x + lambda s + t.
  const Moebius f = Moebius::affine(1.7, 0.3), g = Moebius::affine(0.4, -2.0);
  const Moebius fg = f * g;
  EXPECT_TRUE(fg.is_affine(0.0));
  EXPECT_NEAR(fg.apply(0.0), 1.7 * -2.0 + 0.3, 1e-14);
  EXPECT_NEAR(fg.derivative(5.0), 1.7 * 0.4, 1e-14);
  EXPECT_LT(fg.distance(Moebius::affine(1.7 * 0.4, 1.7 * -2.0 + 0.3)), 1e-14);

  const Moebius diag = Moebius::diagonal(3.0);
  EXPECT_LT(diag.inverse().distance(Moebius::diagonal(1.0 / 3.0)), 1e-15);
}

TEST(MoebiusTest, TraceExamples) {
  EXPECT_DOUBLE_EQ(Moebius::identity().trace(), 2.0);
  EXPECT_DOUBLE_EQ(Moebius::diagonal(2.0).trace(), 2.5);
  EXPECT_NEAR(Moebius(0.0, 1.0, -1.0, 0.0).trace(), 0.0, 1e-15);
  EXPECT_EQ(Moebius::diagonal(2.0).classify(), MoebiusClass::Hyperbolic);
  EXPECT_EQ(Moebius::rotation(0.5).classify(), MoebiusClass::Elliptic);
  EXPECT_EQ(Moebius(1.0, 1.0, 0.0, 1.0).classify(), MoebiusClass::Parabolic);
  EXPECT_EQ(Moebius::identity().classify(), MoebiusClass::Identity);
}

TEST(MoebiusTest, FixedPointsOfAffineMap) {
  const auto fps = Moebius::affine(3.0, 0.0).fixed_points();
  ASSERT_EQ(fps.size(), 2u);
  EXPECT_EQ(fps[0].x, 0.0);
  EXPECT_NEAR(fps[0].derivative, 3.0, 1e-14);
  EXPECT_TRUE(is_infinite(fps[1].x));
  EXPECT_NEAR(fps[1].derivative, 1.0 / 3.0, 1e-14);
}

TEST(MoebiusTest, FixedPointsEllipticAndIdentity) {
  EXPECT_TRUE(Moebius::rotation(1.0).fixed_points().empty());
  try {
    (void)Moebius::identity().fixed_points();
    FAIL() << "identity has no isolated fixed points";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IdentityMap);
  }
}

TEST(MoebiusTest, FixedPointsMatchQuadraticAndIteration) {
  const Moebius m(2.0, 1.0, 1.0, 1.0);  // det 1; x^2 - x - 1 = 0
  const auto fps = m.fixed_points();
  ASSERT_EQ(fps.size(), 2u);
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  EXPECT_NEAR(fps[0].x, 1.0 - phi, 1e-14);
  EXPECT_NEAR(fps[1].x, phi, 1e-14);
  // Forward iteration converges to the attracting point, backward to the other.
  double x = 1.0, y = 1.0;
  for (int i = 0; i < 200; ++i) {
    x = m.apply(x);
    y = m.inverse().apply(y);
  }
  EXPECT_NEAR(x, phi, 1e-13);
  EXPECT_NEAR(y, 1.0 - phi, 1e-13);
  EXPECT_LT(fps[1].derivative, 1.0);
}

TEST(MoebiusTest, DerivativeExamples) {
  EXPECT_DOUBLE_EQ(Moebius::identity().derivative(-4.2), 1.0);
  EXPECT_NEAR(Moebius::diagonal(1.5).derivative(0.0), 2.25, 1e-15);
  std::mt19937_64 rng(2);
  const Moebius m = random_moebius(rng);
  int checked = 0;
  while (checked < 10) {
    const double x = uniform(rng, -3.0, 3.0);
    if (std::fabs(m.c() * x + m.d()) < 0.2) continue;
    const double h = 1e-5;
    const double fd = (m.apply(x + h) - m.apply(x - h)) / (2 * h);
    EXPECT_LT(std::fabs(fd - m.derivative(x)) / m.derivative(x), 1e-6);
    const double fd2 = (m.derivative(x + h) - m.derivative(x - h)) / (2 * h);
    EXPECT_LT(std::fabs(fd2 - m.second_derivative(x)),
              1e-5 * std::max(1.0, std::fabs(m.second_derivative(x))));
    ++checked;
  }
  const Moebius pole(1.0, 0.0, 1.0, 1.0);
  EXPECT_THROW((void)pole.derivative(-1.0), Error);
}

TEST(MoebiusTest, TraceFromBreakSize) {
  try {
    (void)trace_from_break_size(1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateBreak);
  }
  // diag(2, 1/2) has multiplier 4 at 0 and trace 2.5.
  const Moebius diag = Moebius::diagonal(2.0);
  EXPECT_NEAR(diag.derivative(0.0), 4.0, 1e-15);
  EXPECT_NEAR(trace_from_break_size(4.0), diag.trace(), 1e-15);
  EXPECT_NEAR(trace_from_break_size(0.3), trace_from_break_size(1.0 / 0.3), 1e-14);
}

TEST(MoebiusTest, AffineAndConjugation) {
  EXPECT_TRUE(Moebius::affine(0.7, 2.0).is_affine());
  EXPECT_FALSE(Moebius(1.0, 0.0, 0.5, 1.0).is_affine());
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Moebius m = random_moebius(rng), g = random_moebius(rng);
    EXPECT_NEAR(m.conjugate(g).trace(), m.trace(), 1e-12 * std::max(1.0, m.trace()) * 10);
  }
  // Zooming into 0 by x -> x / lambda drives the lower-left entry to 0
  // linearly in lambda.
  const Moebius m(1.3, 0.0, 0.8, 1.0 / 1.3);
  for (double lambda : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const Moebius zoom = Moebius::affine(1.0 / lambda, 0.0);
    EXPECT_NEAR(std::fabs(m.conjugate(zoom).c()) / lambda, 0.8, 1e-10);
  }
}

// ---- properties -------------------------------------------------------------

TEST(MoebiusProperty, DeterminantAndCanonicalSign) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    Moebius m = random_moebius(rng);
    for (int k = 0; k < 3; ++k) m = m * random_moebius(rng);
    const auto [a, b, c, d] = m.entries();
    EXPECT_NEAR(a * d - b * c, 1.0, 1e-12);
    const double first = a != 0.0 ? a : b != 0.0 ? b : c;
    EXPECT_GT(first, 0.0);
  }
}

TEST(MoebiusProperty, AssociativityAndAction) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Moebius x = random_moebius(rng), y = random_moebius(rng), z = random_moebius(rng);
    EXPECT_LT(((x * y) * z).distance(x * (y * z)),
              1e-12 * std::max({1.0, ((x * y) * z).norm()}));
    const double p = uniform(rng, -2.0, 2.0);
    const double inner = y.apply(p);
    if (std::fabs(y.c() * p + y.d()) < 0.1 || std::fabs(x.c() * inner + x.d()) < 0.1) {
      continue;
    }
    EXPECT_NEAR((x * y).apply(p), x.apply(inner), 1e-10 * std::max(1.0, std::fabs(inner)));
  }
}

TEST(MoebiusProperty, HyperbolicMultipliersAndBreakSizeTrace) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const Moebius m = random_hyperbolic(rng);
    const auto fps = m.fixed_points();
    ASSERT_EQ(fps.size(), 2u);
    EXPECT_NEAR(fps[0].derivative * fps[1].derivative, 1.0, 1e-10);
    for (const auto& fp : fps) {
      EXPECT_NEAR(trace_from_break_size(fp.derivative), m.trace(), 1e-9 * m.trace());
    }
  }
}

TEST(MoebiusTest, ThroughThreePoints) {
  std::mt19937_64 rng(7);
  const Moebius m = testing::random_interval_moebius(rng, {0.0, 1.0}, {2.0, 5.0});
  const Moebius fit = moebius_through({0.0, 0.4, 1.0}, {m.apply(0.0), m.apply(0.4), m.apply(1.0)});
  EXPECT_LT(fit.distance(m), 1e-12);
  EXPECT_THROW((void)moebius_through({0.0, 0.5, 1.0}, {1.0, 0.5, 2.0}), Error);
}

}  // namespace
}  // namespace renorm
