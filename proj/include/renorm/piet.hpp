#pragma once

#include <optional>
#include <random>
#include <vector>

#include "renorm/giet.hpp"
#include "renorm/moebius.hpp"

namespace renorm {

// A GIET whose branches are Moebius maps restricted to their intervals.
class Piet {
 public:
  Piet() = default;
  explicit Piet(Giet g);
  // points = u_0 < ... < u_m, the top junctions; maps indexed by letter.
  Piet(const MarkedPermutation& perm, const std::vector<double>& points,
       const std::vector<Moebius>& maps);

  const Giet& giet() const { return giet_; }
  const MarkedPermutation& perm() const { return giet_.perm(); }
  int size() const { return giet_.size(); }
  const Moebius& map(Letter a) const { return maps_[a]; }
  const std::vector<Moebius>& maps() const { return maps_; }
  Interval domain() const;
  std::vector<double> points() const;

 private:
  Giet giet_;
  std::vector<Moebius> maps_;
};

struct RandomPietOptions {
  double min_weight = 0.3;  // interval weights drawn from [min_weight, 1]
  double bend = 0.6;        // interior image point drawn from 0.5 +- bend/2 of the target
  std::optional<Side> side; // force the next Rauzy move
  // Reject draws where some puncture loop has both fixed points in the domain.
  bool separated = false;
};

Piet random_piet(const MarkedPermutation& perm, std::mt19937_64& rng,
                 const RandomPietOptions& options = {});

// g p g^{-1}; g must be increasing and pole free on the domain.
Piet conjugate(const Piet& p, const Moebius& g);

// Loop images around the punctures, in generator-system order. The first one
// (distinguished) fixes the left end of the domain.
std::vector<Moebius> puncture_loops(const Piet& p);
Moebius distinguished_loop(const Piet& p);
// Multiplier of each loop at its in-domain fixed point (right/left derivative
// ratio of the underlying circle map, accumulated over the vertex cycle).
std::vector<double> break_sizes(const Piet& p);
// Every puncture loop has its second fixed point outside the closed domain.
// On this set the fixed-point choice in psi_inverse is unambiguous.
bool separated_fixed_points(const Piet& p);

double affine_defect(const Moebius& loop);  // |lower-left| of the det-one matrix
double affine_defect(const Piet& p);

bool is_in_attracting_family(const Piet& p, double tol = 1e-9);

struct AttractorPoint {
  Piet piet;
  std::vector<double> sizes;
  bool distinguished_ok = false;
};

// Conjugator taking the distinguished loop to an affine map and the domain
// onto [0, 1]: left end -> 0, right end -> 1, other fixed point -> infinity.
Moebius normalising_conjugator(const Piet& p);
AttractorPoint normalise_into_E(const Piet& p);

// Defect of the distinguished loop after conjugating by x -> x / lambda.
double g_lambda_defect(const Piet& p, double lambda);

// ---------------------------------------------------------------------------
// Distance to the Moebius family.

enum class Precision { Double, Extended };
// RENORM_PRECISION=extended selects long double evaluation; anything else double.
Precision precision_from_env();
const char* to_string(Precision p);

// Moebius map through the branch at both ends and the midpoint.
Moebius best_moebius_fit(const BranchFunction& branch);

// C0 + C1 sup distance of the normalised branch to its three-point fit.
double branch_distance_to_P(const BranchFunction& branch, Precision precision,
                            int grid = 257);
double distance_to_P(const Giet& t, Precision precision = Precision::Double, int grid = 257);

// The PIET whose branches are the three-point fits of t's branches.
Piet fitted_piet(const Giet& t);

// Largest |log cross-ratio distortion| over quadruples sampled in each branch.
double max_log_distortion(const Giet& t, int samples = 8);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double ratio() const;  // exp(slope)
};
LineFit fit_log_line(const std::vector<int>& n, const std::vector<double>& values);

struct ConvergenceRow {
  int n = 0;
  double x = 1.0;      // cumulative scale
  double delta = 0.0;  // partition mesh
  double d1 = 0.0;
  double max_log_distortion = 0.0;
  double noise = 0.0;  // |d1(double) - d1(extended)|, scaled to the working precision
  // Distinguished-loop defect of the PIET assembled from the branch fits
  // (NaN when the fits do not form one).
  double affine_defect = 0.0;
  bool above_floor = true;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  LineFit delta_fit;
  LineFit d1_fit;        // over the last `window` levels above the floor
  int window_first = 0;  // first level of the d1 window
  int window_last = -1;
  bool monotone_window = false;
  double correlation = 0.0;  // corr(log delta, log distortion), levels >= 1 above the floor
  std::optional<Error> error;
};

ConvergenceStudy convergence_study(const Giet& t, int n_levels,
                                   Precision precision = Precision::Double, int window = 6,
                                   std::int64_t budget = kDefaultStepBudget);

struct AttractionRow {
  int n = 0;
  double x = 1.0;
  double defect = 0.0;
};

struct AttractionStudy {
  std::vector<AttractionRow> rows;
  LineFit defect_fit;
  LineFit x_fit;
  std::optional<Error> error;
};

AttractionStudy attraction_study(const Piet& p, int n_levels,
                                 std::int64_t budget = kDefaultStepBudget);

// ---------------------------------------------------------------------------
// Slice dimension counts on the chart of Moebius tuples (3 parameters per
// letter).

struct SliceAnalysis {
  int ambient = 0;
  int rank = 0;
  int dimension = 0;
  std::vector<double> singular_values;
  double residual = 0.0;  // constraint residual at the point
};

// Constraints: distinguished loop fixes 0 and is affine, the domain ends at 1
// and, with `with_traces`, each puncture trace matches its size in `c`.
SliceAnalysis slice_analysis(const AttractorPoint& point, const std::vector<double>& c,
                             bool with_traces = true);
int slice_constraint_rank(const AttractorPoint& point, const std::vector<double>& c,
                          bool with_traces = true);

}  // namespace renorm
