#pragma once

#include <limits>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "renorm/branch.hpp"
#include "renorm/error.hpp"

namespace renorm {

using Letter = int;

// Two orderings of the alphabet {0, ..., m-1}: top[i] is the letter of the
// i-th interval before the map, bottom[i] after.
struct MarkedPermutation {
  std::vector<Letter> top;
  std::vector<Letter> bottom;

  int size() const { return static_cast<int>(top.size()); }
  int top_pos(Letter a) const;
  int bottom_pos(Letter a) const;
  bool valid() const;
  // Bottom is a nontrivial cyclic rotation of top.
  bool is_circular() const;
  // Rotation offset s with bottom[i] = top[(i + s) % m]; 0 if not circular.
  int circular_shift() const;
  std::string str() const;

  friend bool operator==(const MarkedPermutation&, const MarkedPermutation&) = default;
  friend auto operator<=>(const MarkedPermutation&, const MarkedPermutation&) = default;
};

bool is_circular(const MarkedPermutation& p);
MarkedPermutation rotation_permutation(int m, int shift);

enum class Side { Top, Bottom };

struct RauzyMove {
  Letter winner = 0;
  Letter loser = 0;
  Side side = Side::Top;
  friend bool operator==(const RauzyMove&, const RauzyMove&) = default;
};

// Combinatorial part of a step. Returns false when the last top and bottom
// letters coincide (no arrow).
bool rauzy_move(const MarkedPermutation& p, Side side, MarkedPermutation& out,
                RauzyMove* move = nullptr);

struct RauzyDiagram {
  std::vector<MarkedPermutation> vertices;
  // arrows[v][0] = target under a top move, arrows[v][1] under a bottom move;
  // -1 if the move is undefined.
  std::vector<std::array<int, 2>> arrows;
  int index_of(const MarkedPermutation& p) const;
  std::size_t arrow_count() const;
};

RauzyDiagram rauzy_diagram(const MarkedPermutation& p);
std::vector<MarkedPermutation> rauzy_class(const MarkedPermutation& p);

class Giet {
 public:
  Giet() = default;
  // branches[a] must map the closed top interval of a onto its bottom
  // interval; top intervals are read off the branch domains.
  Giet(MarkedPermutation perm, std::vector<BranchFunction> branches,
       double tolerance = 1e-10);

  // Affine exchange with the given top-interval lengths (indexed by letter).
  static Giet linear(const MarkedPermutation& perm, const std::vector<double>& lengths);
  // x -> x + alpha mod 1 as a two-letter exchange.
  static Giet rotation(double alpha);

  const MarkedPermutation& perm() const { return perm_; }
  int size() const { return perm_.size(); }
  const BranchFunction& branch(Letter a) const { return branches_[a]; }
  const std::vector<BranchFunction>& branches() const { return branches_; }

  Interval top_interval(Letter a) const { return branches_[a].domain(); }
  Interval bottom_interval(Letter a) const;
  // Interior singularities, sorted.
  std::vector<double> u_top() const;
  std::vector<double> u_bottom() const;
  double top_length(Letter a) const { return top_interval(a).length(); }
  double bottom_length(Letter a) const { return bottom_interval(a).length(); }

  Letter letter_at(double x) const;  // top interval containing x, half-open
  double eval(double x, int order = 0) const;
  double inverse(double y) const;
  bool is_piet() const;

 private:
  MarkedPermutation perm_;
  std::vector<BranchFunction> branches_;
  std::vector<Interval> bottom_;
};

inline constexpr double kCollisionTolerance = 1e-12;
inline constexpr std::int64_t kDefaultStepBudget = 1'000'000;

struct StepResult {
  Giet giet;
  RauzyMove move;
  double scale = 1.0;  // new domain [0, scale] before rescaling
};

StepResult elementary_rauzy_step(const Giet& t);

struct RauzyPath {
  MarkedPermutation start;
  std::vector<RauzyMove> moves;
};

RauzyPath rauzy_path(const Giet& t, int n_steps);
std::vector<int> winner_counts(const RauzyPath& path, int alphabet_size);
bool path_admissible(const RauzyPath& path);

// Merges adjacent intervals of a circular exchange into two blocks.
Giet project_to_2giet(const Giet& t);

struct Renormalisation {
  Giet giet;
  int k = 0;                      // two-level steps grouped
  std::int64_t elementary = 0;    // full-alphabet steps consumed
  double scale = 1.0;             // domain [0, scale] of the previous level
  std::vector<Side> sides;        // two-level sides, in order
  std::vector<RauzyMove> moves;   // elementary moves, in order
  std::vector<std::int64_t> return_times;
};

// One two-level step carried out on the full alphabet.
// `times` seeds the return-time bookkeeping (default: all ones).
Renormalisation two_level_step(const Giet& t, std::int64_t budget = kDefaultStepBudget,
                               std::vector<std::int64_t> times = {});
Renormalisation standard_renormalisation(const Giet& t,
                                         std::int64_t budget = kDefaultStepBudget,
                                         std::vector<std::int64_t> times = {});

std::vector<int> cf_digits(const Giet& t, int n, std::int64_t budget = kDefaultStepBudget);

// Digits until `max_digits`, until the convergent denominator passes
// `q_limit`, or until induction fails; the failure is kept in `stop`.
struct DigitExpansion {
  std::vector<int> digits;
  std::optional<Error> stop;
  std::int64_t steps = 0;
  int partial_run = 0;  // length of the unfinished run when stopped
};
// A run longer than `max_run` also stops the expansion (NonTerminating).
DigitExpansion expand_digits(const Giet& t, int max_digits, double q_limit = 1e300,
                             std::int64_t budget = kDefaultStepBudget,
                             int max_run = std::numeric_limits<int>::max());
// p_n/q_n convergents of [0; a_1, a_2, ...].
struct Convergent {
  double p;
  double q;
};
std::vector<Convergent> convergents(const std::vector<int>& digits);
double cf_value(const std::vector<int>& digits);

struct TowerLevel {
  Giet giet;
  double x = 1.0;  // cumulative scale: level domain is [0, x] in level-0 coords
  int k = 0;
  std::vector<std::int64_t> return_times;  // per letter, in level-0 iterates
};

// Levels 0..n of repeated standard renormalisation. Stops early (without
// throwing) if a step fails and `strict` is false; `error` is then set.
struct Tower {
  std::vector<TowerLevel> levels;
  std::optional<Error> error;
};
Tower build_tower(const Giet& t, int n, bool strict = true,
                  std::int64_t budget = kDefaultStepBudget);

struct PartitionElement {
  Letter letter;
  int iterate;  // k with element = T^k(base interval)
  Interval interval;
};

struct DynamicalPartition {
  int level = 0;
  std::vector<Interval> base;  // per letter, level-0 coordinates
  std::vector<std::int64_t> return_times;
  std::vector<PartitionElement> elements;
  double delta = 0.0;  // largest element length
};

DynamicalPartition dynamical_partition(const Giet& t, const TowerLevel& level, int n);
DynamicalPartition dynamical_partition(const Giet& t, int n);

struct DecayFit {
  double alpha = 0.0;  // fitted per-level ratio
  double d = 0.0;      // fitted constant
  double r2 = 0.0;
  int last_level = 0;  // last level used
  bool floor_hit = false;
  std::vector<double> deltas;
};

DecayFit fit_decay(const std::vector<double>& deltas, int first = 2);
DecayFit partition_decay(const Giet& t, int n);

}  // namespace renorm
