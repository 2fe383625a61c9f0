#include "renorm/circle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "renorm/error.hpp"

namespace renorm {

namespace {

constexpr double kContinuityTolerance = 1e-10;

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

}  // namespace

CircleMap::CircleMap(std::vector<double> breaks, std::vector<BranchFunction> arcs,
                     bool require_breaks)
    : breaks_(std::move(breaks)), arcs_(std::move(arcs)) {
  const int d = break_count();
  if (d > 0 && breaks_.front() != 0.0) {
    throw Error(ErrorCode::SpecInvalid, "first break must sit at 0");
  }
  for (int i = 1; i < d; ++i) {
    if (!(breaks_[i] > breaks_[i - 1]) || !(breaks_[i] < 1.0)) {
      throw Error(ErrorCode::SpecInvalid, "breaks must be sorted in [0,1)");
    }
  }
  const int n_arcs = std::max(1, d);
  if (static_cast<int>(arcs_.size()) != n_arcs) {
    throw Error(ErrorCode::SpecInvalid, "one arc per break expected");
  }
  for (int i = 0; i < n_arcs; ++i) {
    const double lo = d == 0 ? 0.0 : breaks_[i];
    const double hi = i + 1 < d ? breaks_[i + 1] : 1.0;
    const Interval dom = arcs_[i].domain();
    if (std::fabs(dom.lo - lo) > 1e-12 || std::fabs(dom.hi - hi) > 1e-12) {
      throw Error(ErrorCode::DomainMismatch, "arc domain does not match its breaks");
    }
    if (!arcs_[i].is_increasing()) throw Error(ErrorCode::NonMonotone, "arc not increasing");
  }
  for (int i = 0; i + 1 < n_arcs; ++i) {
    const double x = breaks_[i + 1];
    if (std::fabs(arcs_[i].eval(x) - arcs_[i + 1].eval(x)) > kContinuityTolerance) {
      throw Error(ErrorCode::DiscontinuousAtBreak, "arcs disagree at a break");
    }
  }
  if (std::fabs(arcs_.back().eval(1.0) - arcs_.front().eval(0.0) - 1.0) > kContinuityTolerance) {
    throw Error(ErrorCode::DiscontinuousAtBreak, "lift does not have degree one");
  }
  for (int i = 0; i < d; ++i) {
    const BranchFunction& left = arcs_[(i + d - 1) % d];
    const double right_d = arcs_[i].eval(breaks_[i], 1);
    const double left_d = left.eval(i == 0 ? 1.0 : breaks_[i], 1);
    const double c = right_d / left_d;
    if (require_breaks && std::fabs(c - 1.0) < 1e-12) {
      throw Error(ErrorCode::SizeOne, "break of size one");
    }
    sizes_.push_back(c);
  }
}

CircleMap CircleMap::rotation(double alpha) {
  return CircleMap({}, {BranchFunction::affine({0.0, 1.0}, 1.0, frac(alpha))});
}

int CircleMap::arc_index(double x) const {
  if (breaks_.empty()) return 0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return std::max(0, static_cast<int>(it - breaks_.begin()) - 1);
}

double CircleMap::lift(double x) const {
  const BranchFunction& a = arcs_[arc_index(x)];
  const Interval d = a.domain();
  return a.eval(std::clamp(x, d.lo, d.hi));
}

double CircleMap::operator()(double x) const { return frac(lift(frac(x))); }

double CircleMap::derivative(double x) const {
  x = frac(x);
  return arcs_[arc_index(x)].eval(x, 1);
}

double CircleMap::second_derivative(double x) const {
  x = frac(x);
  return arcs_[arc_index(x)].eval(x, 2);
}

double CircleMap::inverse(double y) const {
  const double base = arcs_.front().eval(0.0);
  double yl = frac(y);
  yl += std::floor(base);
  if (yl < base) yl += 1.0;
  for (const auto& a : arcs_) {
    const Interval c = a.codomain();
    if (yl <= c.hi || &a == &arcs_.back()) return frac(a.inverse(std::clamp(yl, c.lo, c.hi)));
  }
  return 0.0;
}

double CircleMap::log_derivative_variation() const {
  double v = 0.0;
  for (const auto& a : arcs_) v += norms(a).log_d1_variation;
  for (double c : sizes_) v += std::fabs(std::log(c));
  return v;
}

// ---------------------------------------------------------------------------

CircleMap make_break_map(const std::vector<double>& breaks, const std::vector<double>& sizes,
                         double beta, const BreakMapOptions& options) {
  const int d = static_cast<int>(breaks.size());
  if (static_cast<int>(sizes.size()) != d) {
    throw Error(ErrorCode::SpecInvalid, "one size per break expected");
  }
  for (double c : sizes) {
    if (!(c > 0.0)) throw Error(ErrorCode::DegenerateBreak, "break size must be positive");
    if (std::fabs(c - 1.0) < 1e-12) throw Error(ErrorCode::SizeOne, "break of size one");
  }
  if (d == 0) return CircleMap::rotation(beta);

  std::vector<double> len(d);
  for (int i = 0; i < d; ++i) len[i] = (i + 1 < d ? breaks[i + 1] : 1.0) - breaks[i];
  // Equal Moebius bend on every arc; the jumps of log r_i absorb the rest.
  double sum_log = 0.0;
  for (double c : sizes) sum_log += std::log(c);
  const double log_k = sum_log / (2.0 * d);
  const double k = std::exp(log_k);
  std::vector<double> s(d, 0.0);
  for (int i = 1; i < d; ++i) s[i] = s[i - 1] + std::log(sizes[i]) - 2.0 * log_k;
  double z = 0.0;
  for (int i = 0; i < d; ++i) z += std::exp(s[i]) * len[i];

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> shape_dist(0, kBumpShapeCount - 1);
  std::uniform_real_distribution<double> sign_dist(-1.0, 1.0);
  std::vector<BranchFunction> arcs;
  double q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double lo = breaks[i], hi = lo + len[i];
    const double image = std::exp(s[i]) * len[i] / z;
    const Moebius bend(k, 0.0, k - 1.0, 1.0);
    const Moebius m = Moebius::affine(image, beta + q) * bend *
                      Moebius::affine(1.0 / len[i], -lo / len[i]);
    Chain chain;
    if (options.bump != 0.0) {
      const int shape = shape_dist(rng);
      const double sign = sign_dist(rng) < 0 ? -1.0 : 1.0;
      chain.push_back(
          PerturbPiece{sign * options.bump * 0.5 / bump_max_slope(shape), shape, lo, hi});
    }
    chain.push_back(MoebiusPiece{m});
    arcs.emplace_back(Interval{lo, hi}, std::move(chain));
    q += image;
  }
  return CircleMap(breaks, std::move(arcs));
}

namespace {

std::vector<int> gauss_digits(long double x, int n) {
  std::vector<int> d;
  for (int i = 0; i < n && x > 0; ++i) {
    const long double inv = 1.0L / x;
    const long double a = std::floor(inv);
    d.push_back(static_cast<int>(std::min<long double>(a, 1e9L)));
    x = inv - a;
  }
  return d;
}

// Sign of rho(T) - target from digit comparison.
int compare_rotation(const CircleMap& t, const std::vector<int>& target, double target_value) {
  DigitExpansion e;
  try {
    // Only the first disagreement matters; cap runs just past the largest digit.
    const int cap = *std::max_element(target.begin(), target.end()) + 1;
    e = expand_digits(to_giet(t, 0), static_cast<int>(target.size()), 1e300,
                      kDefaultStepBudget, cap);
  } catch (const Error&) {
    // Cutting failed: T^{-1}(p_0) hits a break, a rational configuration.
    const double rho = birkhoff_rotation_number(t, 20000);
    return rho < target_value ? -1 : 1;
  }
  const std::size_t n = std::min(e.digits.size(), target.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (e.digits[i] != target[i]) {
      const bool larger = e.digits[i] > target[i];
      // A larger digit at an odd place (1-based) gives a smaller value.
      return ((i % 2 == 0) == larger) ? -1 : 1;
    }
  }
  if (e.digits.size() >= target.size()) return 0;
  // Stopped early: the unfinished run behaves as a large digit.
  const std::size_t i = e.digits.size();
  const double run = e.stop && e.stop->code() == ErrorCode::SingularityCollision
                         ? e.partial_run + 1.0
                         : 1e18;
  if (run == target[i]) {
    // Equal last digit: the rational ends here, the target continues, which
    // at an odd place means the target is smaller.
    return (i % 2 == 0) ? 1 : -1;
  }
  const bool larger = run > target[i];
  return ((i % 2 == 0) == larger) ? -1 : 1;
}

}  // namespace

CircleMap make_break_map_with_rotation(const std::vector<double>& breaks,
                                       const std::vector<double>& sizes, double target,
                                       const BreakMapOptions& options, int digits) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::SpecInvalid, "target rotation number must lie in (0,1)");
  }
  const std::vector<int> want = gauss_digits(target, digits);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    const CircleMap t = make_break_map(breaks, sizes, mid, options);
    const int c = compare_rotation(t, want, target);
    if (c == 0) return t;
    (c < 0 ? lo : hi) = mid;
  }
  return make_break_map(breaks, sizes, 0.5 * (lo + hi), options);
}

CircleMap conjugate(const CircleMap& t, const PerturbPiece& h) {
  if (h.lo != 0.0 || h.hi != 1.0) {
    throw Error(ErrorCode::SpecInvalid, "conjugating bump must cover [0,1]");
  }
  PerturbPiece hinv = h;
  hinv.inverted = !h.inverted;
  auto apply_h = [&](double x) { return eval_piece<double>(h, x).v; };
  const int d = t.break_count();
  std::vector<double> breaks;
  for (double p : t.breaks()) breaks.push_back(apply_h(p));
  std::vector<BranchFunction> arcs;
  for (int i = 0; i < static_cast<int>(t.arcs().size()); ++i) {
    const BranchFunction& a = t.arcs()[i];
    const Interval dom = a.domain();
    const Interval hdom{apply_h(dom.lo), apply_h(dom.hi)};
    BranchFunction inner = then(BranchFunction(hdom, Chain({hinv})), a);
    const Interval c = inner.codomain();
    std::vector<Segment> outer;
    for (double k = std::floor(c.lo); k < c.hi; k += 1.0) {
      const double lo = std::max(c.lo, k), hi = std::min(c.hi, k + 1.0);
      if (hi <= lo) continue;
      outer.push_back({{lo, hi}, Chain({AffinePiece{1.0, -k}, h, AffinePiece{1.0, k}})});
    }
    arcs.push_back(then(inner, BranchFunction(std::move(outer))));
  }
  (void)d;
  return CircleMap(std::move(breaks), std::move(arcs), false);
}

// ---------------------------------------------------------------------------

Giet to_giet(const CircleMap& t, int cut) {
  const int d = t.break_count();
  if (cut < 0 || (d > 0 && cut >= d) || (d == 0 && cut != 0)) {
    throw Error(ErrorCode::SpecInvalid, "cut index out of range");
  }
  const double pc = d == 0 ? 0.0 : t.breaks()[cut];
  std::vector<double> cuts{0.0};
  for (int i = 0; i < d; ++i) {
    if (i != cut) cuts.push_back(frac(t.breaks()[i] - pc));
  }
  const double z = frac(t.inverse(pc) - pc);
  for (double c : cuts) {
    if (std::fabs(z - c) < kCollisionTolerance || std::fabs(z - 1.0) < kCollisionTolerance) {
      throw Error(ErrorCode::SingularityCollision, "preimage of the cut point is a break");
    }
  }
  cuts.push_back(z);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(1.0);
  const int m = static_cast<int>(cuts.size()) - 1;

  std::vector<BranchFunction> branches;
  std::vector<double> image_lo;
  for (int j = 0; j < m; ++j) {
    double a = cuts[j] + pc, b = cuts[j + 1] + pc;
    double shift = 0.0;
    if (a >= 1.0 - 1e-15) shift = 1.0;
    a -= shift;
    b -= shift;
    const int idx = t.arc_index(0.5 * (a + b));
    const BranchFunction& arc = t.arcs()[idx];
    const Interval dom = arc.domain();
    BranchFunction f = arc.restrict({std::max(a, dom.lo), std::min(b, dom.hi)});
    const double mid_val = f.eval(0.5 * (f.domain().lo + f.domain().hi)) - pc;
    const double wrap = std::floor(mid_val);
    // Back to cut coordinates: x' = x - pc + shift, y' = y - pc - wrap.
    f = f.precompose_affine(1.0, pc - shift).postcompose_affine(1.0, -pc - wrap);
    // Snap the domain onto the exact cut values.
    const Interval fd = f.domain();
    if (fd.lo != cuts[j] || fd.hi != cuts[j + 1]) {
      const double lam = fd.length() / (cuts[j + 1] - cuts[j]);
      f = f.precompose_affine(lam, fd.lo - lam * cuts[j]);
    }
    image_lo.push_back(f.codomain().lo);
    branches.push_back(std::move(f));
  }
  MarkedPermutation perm;
  perm.top.resize(m);
  std::iota(perm.top.begin(), perm.top.end(), 0);
  perm.bottom = perm.top;
  std::sort(perm.bottom.begin(), perm.bottom.end(),
            [&](Letter x, Letter y) { return image_lo[x] < image_lo[y]; });
  return Giet(std::move(perm), std::move(branches), 1e-9);
}

double birkhoff_rotation_number(const CircleMap& t, int n, double x0) {
  double x = frac(x0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = t.lift(x);
    total += y - x;
    x = frac(y);
  }
  return frac(total / n);
}

RotationEstimate rotation_number(const CircleMap& t, std::int64_t max_steps) {
  RotationEstimate est;
  DigitExpansion e;
  try {
    e = expand_digits(to_giet(t, 0), 80, 1e7, max_steps);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::SingularityCollision) {
      throw Error(ErrorCode::RationalSuspected, "break orbit hits the cut point");
    }
    e.stop = err;
  }
  if (e.stop) {
    const ErrorCode c = e.stop->code();
    if (c == ErrorCode::SingularityCollision || c == ErrorCode::NonTerminating) {
      throw Error(ErrorCode::RationalSuspected, e.stop->what(), e.stop->step());
    }
  }
  if (e.digits.size() < 2) {
    constexpr int kOrbit = 1'000'000;
    est.rho = birkhoff_rotation_number(t, kOrbit);
    est.quality = RotationQuality::Birkhoff;
    est.gap = 1.0 / kOrbit;
    est.digits = e.digits;
    return est;
  }
  const auto c = convergents(e.digits);
  const std::size_t n = c.size();
  est.rho = c[n - 1].p / c[n - 1].q;
  est.gap = std::fabs(est.rho - c[n - 2].p / c[n - 2].q);
  est.digits = std::move(e.digits);
  return est;
}

DecoratedRotationNumber decorated_rotation_number(const CircleMap& t, int n_orbit) {
  DecoratedRotationNumber out;
  out.rho = rotation_number(t).rho;
  const int d = t.break_count();
  if (d < 2) return out;
  std::vector<std::int64_t> counts(d, 0);
  double x = 0.0;
  for (int k = 0; k < n_orbit; ++k) {
    for (int i = 1; i < d; ++i) counts[i] += x < t.breaks()[i];
    x = t(x);
  }
  for (int i = 1; i < d; ++i) out.marks.push_back(static_cast<double>(counts[i]) / n_orbit);
  return out;
}

CircleObservable log_derivative_observable(const CircleMap& t) {
  return {[&t](double x) { return std::log(t.derivative(x)); }, t.log_derivative_variation()};
}

DenjoyKoksmaReport denjoy_koksma_check(const CircleMap& t, const CircleObservable& f, int n,
                                       const DenjoyKoksmaOptions& options) {
  DenjoyKoksmaReport r;
  r.n = n;
  const RotationEstimate rho = rotation_number(t);
  if (n < 1 || n > static_cast<int>(rho.digits.size())) {
    throw Error(ErrorCode::SpecInvalid, "not enough digits for the requested level");
  }
  r.q = static_cast<std::int64_t>(convergents(rho.digits)[n - 1].q);
  auto mean_from = [&](double x, int count) {
    double s = 0.0;
    for (int k = 0; k < count; ++k) {
      s += f.f(x);
      x = t(x);
    }
    return s / count;
  };
  const int half = std::max(1, options.mean_points / 2);
  const double m1 = mean_from(0.0, half);
  const double m2 = mean_from(0.5, half);
  r.mean = 0.5 * (m1 + m2);
  r.residual = 0.5 * std::fabs(m1 - m2);
  r.variation = f.variation;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < options.points; ++i) {
    double x = unit(rng);
    double s = 0.0;
    for (std::int64_t k = 0; k < r.q; ++k) {
      s += f.f(x) - r.mean;
      x = t(x);
    }
    r.max_abs_sum = std::max(r.max_abs_sum, std::fabs(s));
  }
  r.bound = r.variation + r.q * r.residual;
  r.holds = r.max_abs_sum <= r.bound + 1e-12;
  return r;
}

DistortionReport distortion_bound_check(const CircleMap& t, Interval j, int n, int samples) {
  constexpr double kTol = 1e-12;
  auto liftx = [&](double x) { return t.lift(frac(x)) + std::floor(x); };
  // Circular intervals as (start, length).
  std::vector<std::pair<double, double>> orbit;
  double start = frac(j.lo), len = j.length();
  for (int k = 0; k <= n; ++k) {
    orbit.emplace_back(start, len);
    for (double p : t.breaks()) {
      const double off = frac(p - start);
      if (off > kTol && off < len - kTol) {
        throw Error(ErrorCode::NotDisjoint, "orbit interval contains a break", k);
      }
    }
    const double y0 = liftx(start), y1 = liftx(start + len);
    start = frac(y0);
    len = y1 - y0;
  }
  std::sort(orbit.begin(), orbit.end());
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const auto& a = orbit[i];
    const auto& b = orbit[(i + 1) % orbit.size()];
    const double gap = i + 1 < orbit.size() ? b.first - a.first : b.first + 1.0 - a.first;
    if (orbit.size() > 1 && gap < a.second - kTol) {
      throw Error(ErrorCode::NotDisjoint, "orbit intervals overlap");
    }
  }
  DistortionReport r;
  r.n = n;
  r.bound = std::exp(t.log_derivative_variation());
  double lo = kInfinity, hi = -kInfinity;
  for (double x : chebyshev_grid(j, samples)) {
    // Interior points keep the orbit away from break points.
    x = std::clamp(x, j.lo + 1e-9 * j.length(), j.hi - 1e-9 * j.length());
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += std::log(t.derivative(x));
      x = t(x);
    }
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  r.max_ratio = std::exp(hi - lo);
  r.slack = r.bound / r.max_ratio;
  r.holds = r.max_ratio <= r.bound * (1.0 + 1e-12);
  return r;
}

}  // namespace renorm
