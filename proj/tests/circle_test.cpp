#include "renorm/circle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace renorm {
namespace {

using testing::uniform;

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;
const double kSilver = std::sqrt(2.0) - 1.0;

std::vector<int> gauss_digits(long double x, int n) {
  std::vector<int> d;
  for (int i = 0; i < n; ++i) {
    const long double inv = 1.0L / x;
    const int a = static_cast<int>(std::floor(inv));
    d.push_back(a);
    x = inv - a;
  }
  return d;
}

double circle_dist(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

TEST(CircleTest, OneBreakGolden) {
  const CircleMap t = make_break_map_with_rotation({0.0}, {2.0}, kGolden);
  ASSERT_EQ(t.sizes().size(), 1u);
  EXPECT_NEAR(t.sizes()[0], 2.0, 1e-10);
  const RotationEstimate r = rotation_number(t);
  ASSERT_GE(r.digits.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(r.digits[i], 1) << i;
  EXPECT_NEAR(r.rho, kGolden, 1e-12);
}

TEST(CircleTest, SizeOneRejected) {
  try {
    (void)make_break_map({0.0, 0.5}, {2.0, 1.0}, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SizeOne);
  }
}

TEST(CircleTest, RigidRotationHasNoSizes) {
  const CircleMap t = make_break_map({}, {}, 0.25);
  EXPECT_TRUE(t.sizes().empty());
  EXPECT_NEAR(t(0.9), 0.15, 1e-15);
}

TEST(CircleTest, SizesRealisedWithBumps) {
  const std::vector<double> breaks{0.0, 0.3, 0.55};
  const std::vector<double> sizes{1.7, 0.4, 2.5};
  for (double bump : {0.0, 0.5}) {
    const CircleMap t = make_break_map(breaks, sizes, 0.37, {bump, 5});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(t.sizes()[i], sizes[i], 1e-10);
    // Sizes from one-sided finite differences.
    for (int i = 0; i < 3; ++i) {
      const double p = breaks[i], h = 1e-7;
      const double right = (t.lift(p + h) - t.lift(p)) / h;
      const double left = i == 0 ? (t.lift(1.0) - t.lift(1.0 - h)) / h
                                 : (t.lift(p) - t.lift(p - h)) / h;
      EXPECT_NEAR(right / left, sizes[i], 1e-5);
    }
  }
}

TEST(CircleTest, RotationNumberRigid) {
  const RotationEstimate g = rotation_number(CircleMap::rotation(kGolden));
  EXPECT_EQ(g.quality, RotationQuality::Digits);
  for (int a : g.digits) EXPECT_EQ(a, 1);
  EXPECT_NEAR(g.rho, kGolden, 1e-12);
  EXPECT_LT(g.gap, 1e-12);

  const RotationEstimate s = rotation_number(CircleMap::rotation(kSilver));
  ASSERT_GE(s.digits.size(), 15u);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(s.digits[i], 2);

  try {
    (void)rotation_number(CircleMap::rotation(1.0 / 3.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RationalSuspected);
  }
}

TEST(CircleTest, TargetRotationBisection) {
  // Bounded-type targets: break maps mode-lock on a full-measure set of
  // shifts, so large digits are beyond double resolution in the shift.
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<int> digits(40);
    for (auto& a : digits) a = std::uniform_int_distribution<int>(1, 3)(rng);
    double target = 0.0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) target = 1.0 / (*it + target);
    const CircleMap t =
        make_break_map_with_rotation({0.0, 0.4}, {3.0, 0.6}, target, {}, 10);
    const auto want = gauss_digits(target, 10);
    const RotationEstimate r = rotation_number(t);
    ASSERT_GE(r.digits.size(), 10u);
    EXPECT_EQ(std::vector<int>(r.digits.begin(), r.digits.begin() + 10), want);
  }
}

TEST(CircleProperty, RotationNumberConjugationInvariant) {
  const CircleMap t = make_break_map_with_rotation({0.0, 0.35}, {2.0, 0.7}, kSilver);
  const CircleMap u = conjugate(t, PerturbPiece{0.2 / bump_max_slope(1), 1, 0.0, 1.0});
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(u.sizes()[i], t.sizes()[i], 1e-9);
  const auto dt = rotation_number(t).digits;
  const auto du = rotation_number(u).digits;
  const std::size_t n = std::min<std::size_t>(std::min(dt.size(), du.size()), 14);
  ASSERT_GE(n, 12u);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(dt[i], du[i]) << i;
}

TEST(CircleTest, DecoratedMarks) {
  // Rigid rotation with breaks declared at {0, beta}.
  const double beta = 0.3;
  const CircleMap rigid({0.0, beta},
                        {BranchFunction::affine({0.0, beta}, 1.0, kGolden),
                         BranchFunction::affine({beta, 1.0}, 1.0, kGolden)},
                        false);
  const DecoratedRotationNumber dr = decorated_rotation_number(rigid, 100000);
  ASSERT_EQ(dr.marks.size(), 1u);
  EXPECT_NEAR(dr.marks[0], beta, 1e-3);

  const CircleMap one = make_break_map_with_rotation({0.0}, {2.0}, kGolden);
  EXPECT_TRUE(decorated_rotation_number(one, 1000).marks.empty());
}

TEST(CircleProperty, MarksConjugationInvariant) {
  const CircleMap t =
      make_break_map_with_rotation({0.0, 0.3, 0.6}, {2.0, 0.5, 1.5}, kGolden);
  const CircleMap u = conjugate(t, PerturbPiece{0.3 / bump_max_slope(0), 0, 0.0, 1.0});
  const auto mt = decorated_rotation_number(t, 1'000'000).marks;
  const auto mu = decorated_rotation_number(u, 1'000'000).marks;
  ASSERT_EQ(mt.size(), 2u);
  ASSERT_EQ(mu.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(mt[i], mu[i], 1e-3);
  EXPECT_GT(mt[0], 0.0);
  EXPECT_LT(mt[0], mt[1]);
  EXPECT_LT(mt[1], 1.0);
}

TEST(CircleTest, DenjoyKoksmaRigid) {
  const CircleMap g = CircleMap::rotation(kGolden);
  const DenjoyKoksmaReport r = denjoy_koksma_check(g, log_derivative_observable(g), 5);
  EXPECT_EQ(r.max_abs_sum, 0.0);
  EXPECT_EQ(r.variation, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(CircleTest, DenjoyKoksmaOneBreak) {
  const CircleMap t = make_break_map_with_rotation({0.0}, {2.0}, kGolden);
  const CircleObservable f = log_derivative_observable(t);
  for (int n = 1; n <= 8; ++n) {
    const DenjoyKoksmaReport r = denjoy_koksma_check(t, f, n, {200, 200000, 3});
    EXPECT_TRUE(r.holds) << "n=" << n << " sum " << r.max_abs_sum << " bound " << r.bound;
    if (n == 1) EXPECT_EQ(r.q, 1);
  }
}

TEST(CircleTest, DenjoyKoksmaSingleTerm) {
  // q_1 = 1: a centered observable is bounded by its variation.
  const CircleMap t = make_break_map_with_rotation({0.0, 0.5}, {3.0, 0.5}, kGolden);
  const DenjoyKoksmaReport r = denjoy_koksma_check(t, log_derivative_observable(t), 1);
  EXPECT_EQ(r.q, 1);
  EXPECT_TRUE(r.holds);
}

TEST(CircleTest, DistortionRigidAndAffine) {
  const CircleMap g = CircleMap::rotation(kGolden);
  const DistortionReport rg = distortion_bound_check(g, {0.1, 0.15}, 5);
  EXPECT_NEAR(rg.max_ratio, 1.0, 1e-12);
  EXPECT_TRUE(rg.holds);

  // Sizes with product one give affine arcs.
  const CircleMap a = make_break_map_with_rotation({0.0, 0.5}, {2.0, 0.5}, kGolden);
  const Giet cut = to_giet(a, 0);
  const DynamicalPartition dp = dynamical_partition(cut, 3);
  const Interval base = dp.base[0];
  const DistortionReport ra = distortion_bound_check(a, base, dp.return_times[0] - 1);
  EXPECT_NEAR(ra.max_ratio, 1.0, 1e-9);
  EXPECT_TRUE(ra.holds);
}

TEST(CircleTest, DistortionOneBreakPartition) {
  const CircleMap t = make_break_map_with_rotation({0.0}, {2.0}, kGolden);
  const Giet cut = to_giet(t, 0);
  for (int n = 1; n <= 8; ++n) {
    const DynamicalPartition dp = dynamical_partition(cut, n);
    for (std::size_t a = 0; a < dp.base.size(); ++a) {
      const DistortionReport r =
          distortion_bound_check(t, dp.base[a], static_cast<int>(dp.return_times[a]) - 1);
      EXPECT_TRUE(r.holds) << n;
      EXPECT_GE(r.slack, 1.0);
    }
  }
  EXPECT_THROW((void)distortion_bound_check(t, {0.9, 0.95}, 40), Error);
}

TEST(CircleTest, ToGietRotation) {
  const Giet g = to_giet(CircleMap::rotation(0.3), 0);
  ASSERT_EQ(g.size(), 2);
  EXPECT_NEAR(g.top_length(0), 0.7, 1e-15);
  EXPECT_NEAR(g.top_length(1), 0.3, 1e-15);
  EXPECT_TRUE(g.perm().is_circular());
}

TEST(CircleTest, ToGietOneBreak) {
  const CircleMap t = make_break_map_with_rotation({0.0}, {2.0}, kGolden);
  const Giet g = to_giet(t, 0);
  EXPECT_EQ(g.size(), 2);
  EXPECT_TRUE(g.perm().is_circular());
  EXPECT_NEAR(g.u_top()[0], t.inverse(0.0), 1e-12);
}

TEST(CircleProperty, ToGietRoundTripAndSizes) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 3;
    std::vector<double> breaks{0.0}, sizes;
    for (int i = 1; i < d; ++i) breaks.push_back(breaks.back() + uniform(rng, 0.1, 0.3));
    for (int i = 0; i < d; ++i) sizes.push_back(uniform(rng, 0.3, 3.0));
    const CircleMap t = make_break_map(breaks, sizes, uniform(rng, 0.0, 1.0), {0.5, 9});
    const int cut = trial % d;
    const Giet g = to_giet(t, cut);
    EXPECT_EQ(g.size(), d + 1);
    EXPECT_TRUE(g.perm().is_circular());
    const double pc = breaks[cut];
    for (int i = 0; i < 100; ++i) {
      const double x = uniform(rng, 0.0, 1.0);
      EXPECT_LT(circle_dist(g.eval(x), t(x + pc) - pc - std::floor(t(x + pc) - pc)), 1e-12);
    }
    // Sizes at the matching singularities.
    for (int i = 0; i < d; ++i) {
      const double s = breaks[i] - pc - std::floor(breaks[i] - pc);
      Letter right = g.letter_at(s), left;
      double left_x;
      if (s == 0.0) {
        left = g.perm().top.back();
        left_x = 1.0;
      } else {
        left = g.letter_at(s - 1e-9);
        left_x = s;
      }
      const double c = g.branch(right).eval(s, 1) / g.branch(left).eval(left_x, 1);
      EXPECT_NEAR(c, t.sizes()[i], 1e-10);
    }
  }
}

}  // namespace
}  // namespace renorm
