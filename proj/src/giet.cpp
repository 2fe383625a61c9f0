#include "renorm/giet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace renorm {

// ---------------------------------------------------------------------------
// Permutations

int MarkedPermutation::top_pos(Letter a) const {
  const auto it = std::find(top.begin(), top.end(), a);
  return it == top.end() ? -1 : static_cast<int>(it - top.begin());
}

int MarkedPermutation::bottom_pos(Letter a) const {
  const auto it = std::find(bottom.begin(), bottom.end(), a);
  return it == bottom.end() ? -1 : static_cast<int>(it - bottom.begin());
}

bool MarkedPermutation::valid() const {
  const int m = size();
  if (m < 1 || static_cast<int>(bottom.size()) != m) return false;
  std::vector<int> seen_t(m, 0), seen_b(m, 0);
  for (int i = 0; i < m; ++i) {
    if (top[i] < 0 || top[i] >= m || bottom[i] < 0 || bottom[i] >= m) return false;
    if (seen_t[top[i]]++ || seen_b[bottom[i]]++) return false;
  }
  return true;
}

int MarkedPermutation::circular_shift() const {
  const int m = size();
  if (m < 2 || !valid()) return 0;
  const int s = top_pos(bottom[0]);
  if (s == 0) return 0;
  for (int i = 0; i < m; ++i) {
    if (bottom[i] != top[(i + s) % m]) return 0;
  }
  return s;
}

bool MarkedPermutation::is_circular() const { return circular_shift() != 0; }

std::string MarkedPermutation::str() const {
  std::ostringstream os;
  for (Letter a : top) os << a << ' ';
  os << '/';
  for (Letter a : bottom) os << ' ' << a;
  return os.str();
}

bool is_circular(const MarkedPermutation& p) { return p.is_circular(); }

MarkedPermutation rotation_permutation(int m, int shift) {
  MarkedPermutation p;
  p.top.resize(m);
  p.bottom.resize(m);
  std::iota(p.top.begin(), p.top.end(), 0);
  for (int i = 0; i < m; ++i) p.bottom[i] = (i + shift) % m;
  return p;
}

bool rauzy_move(const MarkedPermutation& p, Side side, MarkedPermutation& out,
                RauzyMove* move) {
  const Letter lt = p.top.back();
  const Letter lb = p.bottom.back();
  if (lt == lb) return false;
  out = p;
  Letter w, l;
  std::vector<Letter>* row;
  if (side == Side::Top) {
    w = lt;
    l = lb;
    row = &out.bottom;
  } else {
    w = lb;
    l = lt;
    row = &out.top;
  }
  row->pop_back();
  const auto at = std::find(row->begin(), row->end(), w);
  row->insert(at + 1, l);
  if (move) *move = {w, l, side};
  return true;
}

int RauzyDiagram::index_of(const MarkedPermutation& p) const {
  const auto it = std::find(vertices.begin(), vertices.end(), p);
  return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
}

std::size_t RauzyDiagram::arrow_count() const {
  std::size_t n = 0;
  for (const auto& a : arrows) n += (a[0] >= 0) + (a[1] >= 0);
  return n;
}

RauzyDiagram rauzy_diagram(const MarkedPermutation& p) {
  RauzyDiagram g;
  std::map<MarkedPermutation, int> index;
  std::deque<int> queue;
  auto visit = [&](const MarkedPermutation& q) {
    const auto [it, fresh] = index.emplace(q, static_cast<int>(g.vertices.size()));
    if (fresh) {
      g.vertices.push_back(q);
      g.arrows.push_back({-1, -1});
      queue.push_back(it->second);
    }
    return it->second;
  };
  visit(p);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int s = 0; s < 2; ++s) {
      MarkedPermutation q;
      if (rauzy_move(g.vertices[v], s == 0 ? Side::Top : Side::Bottom, q)) {
        const int target = visit(q);
        g.arrows[v][s] = target;
      }
    }
  }
  return g;
}

std::vector<MarkedPermutation> rauzy_class(const MarkedPermutation& p) {
  return rauzy_diagram(p).vertices;
}

// ---------------------------------------------------------------------------
// Giet

Giet::Giet(MarkedPermutation perm, std::vector<BranchFunction> branches, double tolerance)
    : perm_(std::move(perm)), branches_(std::move(branches)) {
  const int m = perm_.size();
  if (!perm_.valid() || static_cast<int>(branches_.size()) != m) {
    throw Error(ErrorCode::SpecInvalid, "permutation and branch count disagree");
  }
  double edge = 0.0;
  for (int i = 0; i < m; ++i) {
    const Interval d = branches_[perm_.top[i]].domain();
    if (std::fabs(d.lo - edge) > tolerance) {
      throw Error(ErrorCode::DomainMismatch, "top intervals are not contiguous");
    }
    edge = d.hi;
  }
  if (std::fabs(edge - 1.0) > tolerance) {
    throw Error(ErrorCode::DomainMismatch, "top intervals do not end at 1");
  }
  bottom_.resize(m);
  edge = 0.0;
  for (int i = 0; i < m; ++i) {
    const Letter a = perm_.bottom[i];
    const Interval c = branches_[a].codomain();
    if (std::fabs(c.lo - edge) > tolerance) {
      throw Error(ErrorCode::DomainMismatch, "bottom intervals are not contiguous");
    }
    if (!(c.hi > c.lo)) throw Error(ErrorCode::NonMonotone, "branch is not increasing");
    bottom_[a] = c;
    edge = c.hi;
  }
  if (std::fabs(edge - 1.0) > tolerance) {
    throw Error(ErrorCode::DomainMismatch, "bottom intervals do not end at 1");
  }
  for (const auto& b : branches_) {
    const Interval d = b.domain();
    if (!(b.jet(d.lo).d1 > 0.0) || !(b.jet(d.hi).d1 > 0.0)) {
      throw Error(ErrorCode::NonMonotone, "branch derivative not positive at an endpoint");
    }
  }
}

Giet Giet::linear(const MarkedPermutation& perm, const std::vector<double>& lengths) {
  const int m = perm.size();
  std::vector<double> top_lo(m), bot_lo(m);
  double edge = 0.0;
  for (Letter a : perm.top) {
    top_lo[a] = edge;
    edge += lengths[a];
  }
  const double total = edge;
  edge = 0.0;
  for (Letter a : perm.bottom) {
    bot_lo[a] = edge;
    edge += lengths[a];
  }
  std::vector<BranchFunction> br;
  for (Letter a = 0; a < m; ++a) {
    const double lo = top_lo[a] / total;
    const double hi = (a == perm.top.back()) ? 1.0 : (top_lo[a] + lengths[a]) / total;
    br.push_back(BranchFunction::affine({lo, hi}, 1.0, (bot_lo[a] - top_lo[a]) / total));
  }
  return Giet(perm, std::move(br));
}

Giet Giet::rotation(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::SpecInvalid, "rotation amount must lie in (0,1)");
  }
  return linear(rotation_permutation(2, 1), {1.0 - alpha, alpha});
}

Interval Giet::bottom_interval(Letter a) const { return bottom_[a]; }

std::vector<double> Giet::u_top() const {
  std::vector<double> u;
  for (int i = 0; i + 1 < size(); ++i) u.push_back(top_interval(perm_.top[i]).hi);
  return u;
}

std::vector<double> Giet::u_bottom() const {
  std::vector<double> u;
  for (int i = 0; i + 1 < size(); ++i) u.push_back(bottom_[perm_.bottom[i]].hi);
  return u;
}

Letter Giet::letter_at(double x) const {
  for (int i = 0; i + 1 < size(); ++i) {
    const Letter a = perm_.top[i];
    if (x < top_interval(a).hi) return a;
  }
  return perm_.top.back();
}

double Giet::eval(double x, int order) const {
  const BranchFunction& b = branches_[letter_at(x)];
  const Interval d = b.domain();
  return b.eval(std::clamp(x, d.lo, d.hi), order);
}

double Giet::inverse(double y) const {
  Letter a = perm_.bottom.back();
  for (int i = 0; i + 1 < size(); ++i) {
    if (y < bottom_[perm_.bottom[i]].hi) {
      a = perm_.bottom[i];
      break;
    }
  }
  const Interval c = bottom_[a];
  return branches_[a].inverse(std::clamp(y, c.lo, c.hi));
}

bool Giet::is_piet() const {
  return std::all_of(branches_.begin(), branches_.end(),
                     [](const BranchFunction& b) { return b.is_moebius(); });
}

// ---------------------------------------------------------------------------
// Induction

namespace {

// Tolerance on interval matching after repeated rescaling.
constexpr double kStepTolerance = 1e-8;

BranchFunction clamp_restrict(const BranchFunction& f, double lo, double hi) {
  const Interval d = f.domain();
  return f.restrict({std::max(lo, d.lo), std::min(hi, d.hi)});
}

// Post-composition that reattaches a composed branch to its exact target.
BranchFunction glue(const BranchFunction& first, BranchFunction second) {
  const Interval c = first.codomain();
  const Interval d = second.domain();
  if (std::fabs(c.lo - d.lo) > kStepTolerance || std::fabs(c.hi - d.hi) > kStepTolerance) {
    throw Error(ErrorCode::DomainMismatch, "induced branch does not match");
  }
  // Absorb rounding: stretch the outer branch's domain onto the codomain.
  if (c.lo != d.lo || c.hi != d.hi) {
    const double lam = d.length() / c.length();
    second = second.precompose_affine(lam, d.lo - lam * c.lo);
  }
  return then(first, second);
}

// Rounding in inverses and stretches leaves adjacent bottom intervals a few
// ulps to 1e-9 apart; left alone this accumulates along a tower.
void snap_codomains(const MarkedPermutation& p, std::vector<BranchFunction>& br) {
  const int m = p.size();
  std::vector<double> ends(m + 1);
  ends[0] = br[p.top.front()].domain().lo;
  ends[m] = br[p.top.back()].domain().hi;
  for (int i = 1; i < m; ++i) {
    ends[i] = 0.5 * (br[p.bottom[i - 1]].codomain().hi + br[p.bottom[i]].codomain().lo);
  }
  for (int i = 0; i < m; ++i) {
    BranchFunction& b = br[p.bottom[i]];
    const Interval c = b.codomain();
    if (c.lo == ends[i] && c.hi == ends[i + 1]) continue;
    const double lam = (ends[i + 1] - ends[i]) / c.length();
    b = b.postcompose_affine(lam, ends[i] - lam * c.lo);
  }
}

}  // namespace

StepResult elementary_rauzy_step(const Giet& t) {
  const MarkedPermutation& p = t.perm();
  const Letter lt = p.top.back();
  const Letter lb = p.bottom.back();
  if (lt == lb) {
    throw Error(ErrorCode::InadmissibleMove, "last top and bottom letters coincide");
  }
  const double top_len = t.top_length(lt);
  const double bot_len = t.bottom_length(lb);
  if (std::fabs(top_len - bot_len) <= kCollisionTolerance) {
    throw Error(ErrorCode::SingularityCollision, "rightmost singularities coincide");
  }
  const Side side = top_len > bot_len ? Side::Top : Side::Bottom;
  StepResult r;
  MarkedPermutation np;
  rauzy_move(p, side, np, &r.move);
  const Letter w = r.move.winner;
  const Letter l = r.move.loser;

  std::vector<BranchFunction> br = t.branches();
  double xp;
  if (side == Side::Top) {
    const Interval dw = br[w].domain();
    const Interval cl = br[l].codomain();
    xp = cl.lo;
    br[l] = glue(br[l], clamp_restrict(br[w], cl.lo, cl.hi));
    br[w] = br[w].restrict({dw.lo, xp});
  } else {
    const Interval dw = br[w].domain();
    xp = br[l].domain().lo;
    const double y = br[w].inverse(xp);
    BranchFunction tail = br[w].restrict({y, dw.hi});
    br[w] = br[w].restrict({dw.lo, y});
    BranchFunction ll = br[l];
    br[l] = glue(tail, std::move(ll));
  }
  for (auto& b : br) b = b.precompose_affine(xp, 0.0).postcompose_affine(1.0 / xp, 0.0);
  snap_codomains(np, br);
  r.giet = Giet(std::move(np), std::move(br), kStepTolerance);
  r.scale = xp;
  return r;
}

RauzyPath rauzy_path(const Giet& t, int n_steps) {
  RauzyPath path{t.perm(), {}};
  Giet cur = t;
  for (int i = 0; i < n_steps; ++i) {
    try {
      StepResult s = elementary_rauzy_step(cur);
      path.moves.push_back(s.move);
      cur = std::move(s.giet);
    } catch (const Error& e) {
      throw Error(e.code(), "at step " + std::to_string(i), i);
    }
  }
  return path;
}

std::vector<int> winner_counts(const RauzyPath& path, int alphabet_size) {
  std::vector<int> counts(alphabet_size, 0);
  for (const auto& mv : path.moves) ++counts[mv.winner];
  return counts;
}

bool path_admissible(const RauzyPath& path) {
  MarkedPermutation cur = path.start;
  for (const auto& mv : path.moves) {
    MarkedPermutation next;
    RauzyMove actual;
    if (!rauzy_move(cur, mv.side, next, &actual) || !(actual == mv)) return false;
    cur = std::move(next);
  }
  return true;
}

Giet project_to_2giet(const Giet& t) {
  const MarkedPermutation& p = t.perm();
  const int s = p.circular_shift();
  if (s == 0) throw Error(ErrorCode::NotCircular, "permutation is not circular");
  if (p.size() == 2) return t;
  auto block = [&](int from, int to) {
    std::vector<Segment> segs;
    for (int i = from; i < to; ++i) {
      for (const auto& sg : t.branch(p.top[i]).segments()) segs.push_back(sg);
    }
    return BranchFunction(std::move(segs));
  };
  std::vector<BranchFunction> br{block(0, s), block(s, p.size())};
  return Giet(rotation_permutation(2, 1), std::move(br), kStepTolerance);
}

namespace {

struct BlockLengths {
  double a_top = 0.0;     // first top block
  double b_top = 0.0;     // last top block
  double a_bottom = 0.0;  // image of the first top block (last in bottom)
};

BlockLengths blocks(const Giet& t) {
  const MarkedPermutation& p = t.perm();
  const int s = p.circular_shift();
  if (s == 0) throw Error(ErrorCode::NotCircular, "permutation is not circular");
  BlockLengths bl;
  for (int i = 0; i < p.size(); ++i) {
    const Letter a = p.top[i];
    if (i < s) {
      bl.a_top += t.top_length(a);
      bl.a_bottom += t.bottom_length(a);
    } else {
      bl.b_top += t.top_length(a);
    }
  }
  return bl;
}

}  // namespace

Renormalisation two_level_step(const Giet& t, std::int64_t budget,
                               std::vector<std::int64_t> times) {
  const BlockLengths bl = blocks(t);
  if (std::fabs(bl.b_top - bl.a_bottom) <= kCollisionTolerance) {
    throw Error(ErrorCode::SingularityCollision, "block endpoints coincide");
  }
  Renormalisation r;
  const Side side = bl.b_top > bl.a_bottom ? Side::Top : Side::Bottom;
  r.sides.push_back(side);
  r.k = 1;
  constexpr double kReach = 1e-9;
  double target = side == Side::Top ? 1.0 - bl.a_bottom : 1.0 - bl.b_top;
  if (target >= 1.0 - kReach) {
    throw Error(ErrorCode::NonTerminating, "block has collapsed onto an end point");
  }
  if (times.empty()) times.assign(t.size(), 1);
  Giet cur = t;
  while (target < 1.0 - kReach) {
    if (r.elementary >= budget) {
      throw Error(ErrorCode::NonTerminating, "step budget exhausted",
                  static_cast<long>(r.elementary));
    }
    StepResult s = elementary_rauzy_step(cur);
    ++r.elementary;
    r.moves.push_back(s.move);
    times[s.move.loser] += times[s.move.winner];
    r.scale *= s.scale;
    target /= s.scale;
    cur = std::move(s.giet);
    if (target > 1.0 + kReach) {
      throw Error(ErrorCode::DomainMismatch, "full-alphabet induction overshot block target");
    }
  }
  if (!cur.perm().is_circular()) {
    throw Error(ErrorCode::NotCircular, "induced permutation lost circularity");
  }
  r.giet = std::move(cur);
  r.return_times = std::move(times);
  return r;
}

Renormalisation standard_renormalisation(const Giet& t, std::int64_t budget,
                                         std::vector<std::int64_t> times) {
  Renormalisation acc = two_level_step(t, budget, std::move(times));
  const Side first = acc.sides.front();
  for (;;) {
    if (acc.elementary >= budget) {
      throw Error(ErrorCode::NonTerminating, "step budget exhausted",
                  static_cast<long>(acc.elementary));
    }
    Renormalisation next =
        two_level_step(acc.giet, budget - acc.elementary, std::move(acc.return_times));
    acc.k += 1;
    acc.elementary += next.elementary;
    acc.scale *= next.scale;
    acc.sides.push_back(next.sides.front());
    acc.moves.insert(acc.moves.end(), next.moves.begin(), next.moves.end());
    acc.giet = std::move(next.giet);
    acc.return_times = std::move(next.return_times);
    if (acc.sides.back() != first) break;
  }
  return acc;
}

DigitExpansion expand_digits(const Giet& t, int max_digits, double q_limit,
                             std::int64_t budget, int max_run) {
  // Runs of equal two-level sides: a bottom run of length a_1 - 1 (possibly
  // empty), then alternating runs of lengths a_2, a_3, ...
  DigitExpansion out;
  Giet cur;
  try {
    cur = project_to_2giet(t);
  } catch (const Error& e) {
    out.stop = e;
    return out;
  }
  Side expect = Side::Bottom;
  int run = 1;
  double q0 = 0, q1 = 1;
  while (static_cast<int>(out.digits.size()) < max_digits) {
    if (out.steps >= budget) {
      out.stop = Error(ErrorCode::NonTerminating, "digit budget exhausted",
                       static_cast<long>(out.steps));
      break;
    }
    if (run > max_run) {
      out.stop = Error(ErrorCode::NonTerminating, "digit run exceeds cap",
                       static_cast<long>(out.steps));
      break;
    }
    try {
      const BlockLengths bl = blocks(cur);
      if (std::fabs(bl.b_top - bl.a_bottom) <= kCollisionTolerance) {
        throw Error(ErrorCode::SingularityCollision, "block endpoints coincide",
                    static_cast<long>(out.steps));
      }
      const Side side = bl.b_top > bl.a_bottom ? Side::Top : Side::Bottom;
      if (side != expect) {
        out.digits.push_back(run);
        const double q = run * q1 + q0;
        q0 = q1;
        q1 = q;
        run = 0;
        expect = side;
        if (static_cast<int>(out.digits.size()) == max_digits || q1 > q_limit) break;
      }
      StepResult s = elementary_rauzy_step(cur);
      cur = std::move(s.giet);
    } catch (const Error& e) {
      out.stop = Error(e.code(), e.what(), static_cast<long>(out.steps));
      break;
    }
    ++run;
    ++out.steps;
  }
  out.partial_run = run;
  return out;
}

std::vector<int> cf_digits(const Giet& t, int n, std::int64_t budget) {
  DigitExpansion e = expand_digits(t, n, 1e300, budget);
  if (static_cast<int>(e.digits.size()) < n) throw *e.stop;
  return e.digits;
}

std::vector<Convergent> convergents(const std::vector<int>& digits) {
  std::vector<Convergent> out;
  double p0 = 1, q0 = 0, p1 = 0, q1 = 1;
  for (int a : digits) {
    const double p = a * p1 + p0;
    const double q = a * q1 + q0;
    out.push_back({p, q});
    p0 = p1;
    q0 = q1;
    p1 = p;
    q1 = q;
  }
  return out;
}

double cf_value(const std::vector<int>& digits) {
  double v = 0.0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) v = 1.0 / (*it + v);
  return v;
}

// ---------------------------------------------------------------------------
// Towers and partitions

Tower build_tower(const Giet& t, int n, bool strict, std::int64_t budget) {
  Tower tower;
  tower.levels.push_back({t, 1.0, 0, std::vector<std::int64_t>(t.size(), 1)});
  for (int i = 1; i <= n; ++i) {
    const TowerLevel& prev = tower.levels.back();
    try {
      Renormalisation r = standard_renormalisation(prev.giet, budget, prev.return_times);
      tower.levels.push_back(
          {std::move(r.giet), prev.x * r.scale, r.k, std::move(r.return_times)});
    } catch (const Error& e) {
      if (strict) throw Error(e.code(), "tower level " + std::to_string(i) + ": " + e.what(), i);
      tower.error = Error(e.code(), "tower level " + std::to_string(i) + ": " + e.what(), i);
      break;
    }
  }
  return tower;
}

DynamicalPartition dynamical_partition(const Giet& t, const TowerLevel& level, int n) {
  constexpr std::int64_t kMaxElements = 10'000'000;
  DynamicalPartition dp;
  dp.level = n;
  dp.return_times = level.return_times;
  const std::int64_t total =
      std::accumulate(dp.return_times.begin(), dp.return_times.end(), std::int64_t{0});
  if (total > kMaxElements) {
    throw Error(ErrorCode::NonTerminating, "partition too large to enumerate", n);
  }
  dp.elements.reserve(static_cast<std::size_t>(total));
  for (Letter a = 0; a < level.giet.size(); ++a) {
    const Interval b = level.giet.top_interval(a);
    dp.base.push_back({b.lo * level.x, b.hi * level.x});
    // Floors are pushed in extended precision to keep the total measure.
    long double lo = static_cast<long double>(b.lo) * level.x;
    long double hi = static_cast<long double>(b.hi) * level.x;
    for (std::int64_t k = 0; k < dp.return_times[a]; ++k) {
      const Interval iv{static_cast<double>(lo), static_cast<double>(hi)};
      dp.elements.push_back({a, static_cast<int>(k), iv});
      dp.delta = std::max(dp.delta, static_cast<double>(hi - lo));
      const BranchFunction& br = t.branch(t.letter_at(0.5 * (iv.lo + iv.hi)));
      const Interval d = br.domain();
      lo = br.jet<long double>(std::clamp<long double>(lo, d.lo, d.hi)).v;
      hi = br.jet<long double>(std::clamp<long double>(hi, d.lo, d.hi)).v;
    }
  }
  return dp;
}

DynamicalPartition dynamical_partition(const Giet& t, int n) {
  const Tower tower = build_tower(t, n);
  return dynamical_partition(t, tower.levels.back(), n);
}

DecayFit fit_decay(const std::vector<double>& deltas, int first) {
  DecayFit fit;
  fit.deltas = deltas;
  std::vector<double> xs, ys;
  for (int n = first; n < static_cast<int>(deltas.size()); ++n) {
    xs.push_back(n);
    ys.push_back(std::log(deltas[n]));
  }
  const std::size_t k = xs.size();
  if (k < 2) throw Error(ErrorCode::PrecisionFloor, "too few levels for a decay fit");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.alpha = std::exp(slope);
  fit.d = std::exp(my - slope * mx);
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.last_level = static_cast<int>(deltas.size()) - 1;
  return fit;
}

DecayFit partition_decay(const Giet& t, int n) {
  const double floor = 1e3 * std::numeric_limits<double>::epsilon();
  const Tower tower = build_tower(t, n, false);
  std::vector<double> deltas;
  bool floor_hit = false;
  for (int i = 0; i < static_cast<int>(tower.levels.size()); ++i) {
    const double d = dynamical_partition(t, tower.levels[i], i).delta;
    if (d < floor) {
      floor_hit = true;
      break;
    }
    deltas.push_back(d);
  }
  if (tower.error && tower.error->code() != ErrorCode::PrecisionFloor &&
      static_cast<int>(deltas.size()) < 4) {
    throw *tower.error;
  }
  DecayFit fit = fit_decay(deltas);
  fit.floor_hit = floor_hit;
  return fit;
}

}  // namespace renorm
