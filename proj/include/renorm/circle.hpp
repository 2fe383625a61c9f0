#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "renorm/branch.hpp"
#include "renorm/giet.hpp"

namespace renorm {

// Lifted circle homeomorphism, smooth on the arcs between break points.
// Arc i covers [p_i, p_{i+1}] (p_d = 1) and takes lifted values; the lift
// satisfies T(1) = T(0) + 1. A map with no breaks has a single arc [0, 1]
// and sizes() is empty.
class CircleMap {
 public:
  CircleMap() = default;
  // With `require_breaks` the sizes at the listed points must differ from 1.
  CircleMap(std::vector<double> breaks, std::vector<BranchFunction> arcs,
            bool require_breaks = true);

  static CircleMap rotation(double alpha);

  int break_count() const { return static_cast<int>(breaks_.size()); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<BranchFunction>& arcs() const { return arcs_; }
  const std::vector<double>& sizes() const { return sizes_; }

  int arc_index(double x) const;  // x in [0,1)
  double lift(double x) const;    // x in [0,1], lifted value
  double operator()(double x) const;  // circle value in [0,1)
  double derivative(double x) const;
  double second_derivative(double x) const;
  double inverse(double y) const;  // circle preimage in [0,1)

  // Total variation of log DT over the circle, jumps at breaks included.
  double log_derivative_variation() const;

 private:
  std::vector<double> breaks_;
  std::vector<BranchFunction> arcs_;
  std::vector<double> sizes_;
};

struct BreakMapOptions {
  double bump = 0.0;  // relative bump amplitude on each arc (0..1 of the guard)
  std::uint64_t seed = 0;
};

// Piecewise-Moebius map with prescribed break points and sizes, shifted by
// `beta`. Arc P_i maps onto an arc of length r_i |P_i| through
// u -> k u / (1 + (k - 1) u) in normalised coordinates.
CircleMap make_break_map(const std::vector<double>& breaks, const std::vector<double>& sizes,
                         double beta, const BreakMapOptions& options = {});

// Same, with beta tuned so the digits of the rotation number agree with
// `target` on the first `digits` places.
CircleMap make_break_map_with_rotation(const std::vector<double>& breaks,
                                       const std::vector<double>& sizes, double target,
                                       const BreakMapOptions& options = {}, int digits = 30);

// h o T o h^{-1} with h the smooth circle diffeo x -> x + bump on [0,1].
CircleMap conjugate(const CircleMap& t, const PerturbPiece& h);

enum class RotationQuality { Digits, Birkhoff };

struct RotationEstimate {
  double rho = 0.0;
  RotationQuality quality = RotationQuality::Digits;
  double gap = 0.0;  // |p_n/q_n - p_{n+1}/q_{n+1}|
  std::vector<int> digits;
};

Giet to_giet(const CircleMap& t, int cut_break_index = 0);

RotationEstimate rotation_number(const CircleMap& t,
                                 std::int64_t max_steps = kDefaultStepBudget);
double birkhoff_rotation_number(const CircleMap& t, int n, double x0 = 0.0);

struct DecoratedRotationNumber {
  double rho = 0.0;
  std::vector<double> marks;
};

DecoratedRotationNumber decorated_rotation_number(const CircleMap& t, int n_orbit);

// Observable on the circle with a known total variation.
struct CircleObservable {
  std::function<double(double)> f;
  double variation = 0.0;
};

CircleObservable log_derivative_observable(const CircleMap& t);

struct DenjoyKoksmaReport {
  int n = 0;
  std::int64_t q = 0;
  double mean = 0.0;      // Birkhoff mean subtracted
  double residual = 0.0;  // spread between two independent mean estimates
  double max_abs_sum = 0.0;
  double variation = 0.0;
  double bound = 0.0;     // variation + q |residual|
  bool holds = false;
};

struct DenjoyKoksmaOptions {
  int points = 1000;
  int mean_points = 1'000'000;
  std::uint64_t seed = 1;
};

DenjoyKoksmaReport denjoy_koksma_check(const CircleMap& t, const CircleObservable& f, int n,
                                       const DenjoyKoksmaOptions& options = {});

struct DistortionReport {
  int n = 0;
  double max_ratio = 1.0;  // max over sampled x, y of DT^n(x) / DT^n(y)
  double bound = 1.0;      // exp(Var log DT)
  double slack = 0.0;      // bound / max_ratio
  bool holds = false;
};

// J, T(J), ..., T^n(J) must be pairwise disjoint with no break inside.
DistortionReport distortion_bound_check(const CircleMap& t, Interval j, int n,
                                        int samples = 16);

}  // namespace renorm
