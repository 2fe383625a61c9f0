#include "renorm/branch.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "renorm/error.hpp"

namespace renorm {

double bump_max_slope(int shape) {
  static const std::array<double, kBumpShapeCount> cached = [] {
    std::array<double, kBumpShapeCount> out{};
    for (int s = 0; s < kBumpShapeCount; ++s) {
      double m = 0.0;
      for (int i = 0; i <= 20000; ++i) {
        m = std::max(m, std::fabs(bump_profile<double>(s, i / 20000.0)[1]));
      }
      out[s] = m;
    }
    return out;
  }();
  return cached.at(shape);
}

namespace {

bool is_linear(const Piece& p) { return !std::holds_alternative<PerturbPiece>(p); }

Moebius as_matrix(const Piece& p) {
  if (const auto* af = std::get_if<AffinePiece>(&p)) {
    return Moebius::affine(af->lambda, af->t);
  }
  return std::get<MoebiusPiece>(p).m;
}

bool is_trivial(const Piece& p) {
  if (const auto* af = std::get_if<AffinePiece>(&p)) {
    return af->lambda == 1.0 && af->t == 0.0;
  }
  if (const auto* pp = std::get_if<PerturbPiece>(&p)) return pp->amplitude == 0.0;
  return false;
}

// `second` applied after `first`; both linear.
Piece merge(const Piece& first, const Piece& second) {
  const auto* a1 = std::get_if<AffinePiece>(&first);
  const auto* a2 = std::get_if<AffinePiece>(&second);
  if (a1 && a2) {
    return AffinePiece{a2->lambda * a1->lambda, a2->lambda * a1->t + a2->t};
  }
  return MoebiusPiece{as_matrix(second).compose(as_matrix(first))};
}

void validate_piece(const Piece& p) {
  if (const auto* af = std::get_if<AffinePiece>(&p)) {
    if (!(af->lambda > 0.0) || !std::isfinite(af->t)) {
      throw Error(ErrorCode::NonMonotone, "affine piece needs positive slope");
    }
  } else if (const auto* pp = std::get_if<PerturbPiece>(&p)) {
    if (pp->shape < 0 || pp->shape >= kBumpShapeCount) {
      throw Error(ErrorCode::NonMonotone, "unknown bump shape");
    }
    if (!(pp->hi > pp->lo)) {
      throw Error(ErrorCode::NonMonotone, "bump support must be nonempty");
    }
    if (std::fabs(pp->amplitude) * bump_max_slope(pp->shape) >= 0.5) {
      throw Error(ErrorCode::NonMonotone,
                  "bump amplitude violates the monotonicity guard");
    }
  }
}

double invert_piece(const Piece& p, double y) {
  if (const auto* af = std::get_if<AffinePiece>(&p)) {
    return (y - af->t) / af->lambda;
  }
  if (const auto* mp = std::get_if<MoebiusPiece>(&p)) {
    return mp->m.inverse().apply(y);
  }
  const auto& pp = std::get<PerturbPiece>(p);
  if (y <= pp.lo || y >= pp.hi) return y;
  if (pp.inverted) {
    PerturbPiece fwd = pp;
    fwd.inverted = false;
    return eval_piece<double>(fwd, y).v;
  }
  // Safeguarded Newton on x + eps h B((x-lo)/h) = y, derivative >= 1/2.
  double lo = pp.lo, hi = pp.hi, x = y;
  for (int it = 0; it < 100; ++it) {
    const Jet<double> j = eval_piece<double>(p, x);
    const double r = j.v - y;
    if (r > 0) hi = x; else lo = x;
    double next = x - r / j.d1;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-17 * std::max(1.0, std::fabs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

Chain::Chain(std::vector<Piece> pieces) {
  for (const Piece& p : pieces) push_back(p);
}

void Chain::push_back(const Piece& piece) {
  validate_piece(piece);
  if (is_trivial(piece)) return;
  if (!pieces_.empty() && is_linear(piece) && is_linear(pieces_.back())) {
    pieces_.back() = merge(pieces_.back(), piece);
    return;
  }
  pieces_.push_back(piece);
}

void Chain::push_front(const Piece& piece) {
  validate_piece(piece);
  if (is_trivial(piece)) return;
  if (!pieces_.empty() && is_linear(piece) && is_linear(pieces_.front())) {
    pieces_.front() = merge(piece, pieces_.front());
    return;
  }
  pieces_.insert(pieces_.begin(), piece);
}

void Chain::append(const Chain& then) {
  if (pieces_.empty()) {
    pieces_ = then.pieces_;
    return;
  }
  pieces_.reserve(pieces_.size() + then.pieces_.size());
  auto it = then.pieces_.begin();
  if (it != then.pieces_.end() && is_linear(*it) && is_linear(pieces_.back())) {
    pieces_.back() = merge(pieces_.back(), *it);
    ++it;
  }
  pieces_.insert(pieces_.end(), it, then.pieces_.end());
}

bool Chain::is_moebius() const {
  return pieces_.empty() || (pieces_.size() == 1 && is_linear(pieces_.front()));
}

Moebius Chain::as_moebius() const {
  if (pieces_.empty()) return Moebius::identity();
  if (!is_moebius()) {
    throw Error(ErrorCode::DomainMismatch, "chain is not a single Moebius piece");
  }
  return as_matrix(pieces_.front());
}

// ----------------------------------------------------------------------------

BranchFunction::BranchFunction(Interval domain, Chain chain)
    : segments_{Segment{domain, std::move(chain)}} {
  if (!(domain.hi > domain.lo)) {
    throw Error(ErrorCode::DomainMismatch, "branch domain must be nonempty");
  }
}

BranchFunction::BranchFunction(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw Error(ErrorCode::DomainMismatch, "branch needs at least one segment");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].domain.hi > segments_[i].domain.lo)) {
      throw Error(ErrorCode::DomainMismatch, "empty segment");
    }
    if (i > 0 && segments_[i].domain.lo != segments_[i - 1].domain.hi) {
      throw Error(ErrorCode::DomainMismatch, "segments must be contiguous");
    }
  }
}

BranchFunction BranchFunction::identity(Interval domain) {
  return BranchFunction(domain, Chain{});
}

BranchFunction BranchFunction::moebius(Interval domain, const Moebius& m) {
  return BranchFunction(domain, Chain({MoebiusPiece{m}}));
}

BranchFunction BranchFunction::affine(Interval domain, double lambda, double t) {
  return BranchFunction(domain, Chain({AffinePiece{lambda, t}}));
}

Interval BranchFunction::domain() const {
  return {segments_.front().domain.lo, segments_.back().domain.hi};
}

Interval BranchFunction::codomain() const {
  const auto& f = segments_.front();
  const auto& b = segments_.back();
  return {f.chain.jet<double>(f.domain.lo).v, b.chain.jet<double>(b.domain.hi).v};
}

bool BranchFunction::is_moebius() const {
  return segments_.size() == 1 && segments_.front().chain.is_moebius();
}

Moebius BranchFunction::as_moebius() const {
  if (segments_.size() != 1) {
    throw Error(ErrorCode::DomainMismatch, "piecewise branch is not Moebius");
  }
  return segments_.front().chain.as_moebius();
}

std::size_t BranchFunction::total_pieces() const {
  std::size_t n = 0;
  for (const auto& s : segments_) n += s.chain.size();
  return n;
}

const Segment& BranchFunction::segment_for(double x) const {
  const Interval dom = domain();
  const double slack = kSnapTolerance + 1e-9 * dom.length();
  if (!(x >= dom.lo - slack && x <= dom.hi + slack)) {
    throw Error(ErrorCode::OutOfDomain,
                "x=" + std::to_string(x) + " outside [" + std::to_string(dom.lo) +
                    ", " + std::to_string(dom.hi) + "]");
  }
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), x,
      [](double v, const Segment& s) { return v < s.domain.hi; });
  if (it == segments_.end()) return segments_.back();
  return *it;
}

double BranchFunction::eval(double x, int order) const {
  const Jet<double> j = jet<double>(x);
  return order == 0 ? j.v : order == 1 ? j.d1 : j.d2;
}

double BranchFunction::inverse(double y) const {
  const Segment* seg = &segments_.back();
  for (const auto& s : segments_) {
    if (y <= s.chain.jet<double>(s.domain.hi).v) {
      seg = &s;
      break;
    }
  }
  double x = y;
  const auto pieces = seg->chain.pieces();
  for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
    x = invert_piece(*it, x);
  }
  // Piecewise inversion loses accuracy through merged affine pieces with large
  // coefficients; polish against the full chain in extended precision.
  const Interval d = seg->domain;
  x = std::clamp(x, d.lo, d.hi);
  const double r0 = seg->chain.jet<double>(x).v - y;
  if (std::fabs(r0) <= 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(y))) {
    return x;
  }
  for (int it = 0; it < 3; ++it) {
    const Jet<long double> j = seg->chain.jet<long double>(x);
    if (!(j.d1 > 0)) break;
    const double next = std::clamp(static_cast<double>(x - (j.v - y) / j.d1), d.lo, d.hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

BranchFunction BranchFunction::restrict(Interval sub) const {
  const Interval dom = domain();
  const double slack = kSnapTolerance + 1e-9 * dom.length();
  if (sub.lo < dom.lo - slack || sub.hi > dom.hi + slack || !(sub.hi > sub.lo)) {
    throw Error(ErrorCode::OutOfDomain, "restriction interval outside domain");
  }
  std::vector<Segment> out;
  for (const auto& s : segments_) {
    const double lo = std::max(s.domain.lo, sub.lo);
    const double hi = std::min(s.domain.hi, sub.hi);
    if (hi > lo) out.push_back({{lo, hi}, s.chain});
  }
  if (out.empty()) {
    out.push_back({sub, segment_for(0.5 * (sub.lo + sub.hi)).chain});
  }
  out.front().domain.lo = sub.lo;
  out.back().domain.hi = sub.hi;
  return BranchFunction(std::move(out));
}

BranchFunction BranchFunction::precompose_affine(double lambda, double t) const {
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) {
    Segment n{{(s.domain.lo - t) / lambda, (s.domain.hi - t) / lambda}, s.chain};
    n.chain.push_front(AffinePiece{lambda, t});
    out.push_back(std::move(n));
  }
  for (std::size_t i = 1; i < out.size(); ++i) out[i].domain.lo = out[i - 1].domain.hi;
  return BranchFunction(std::move(out));
}

BranchFunction BranchFunction::postcompose_affine(double lambda, double t) const {
  std::vector<Segment> out = segments_;
  for (auto& s : out) s.chain.push_back(AffinePiece{lambda, t});
  return BranchFunction(std::move(out));
}

std::vector<double> chebyshev_grid(Interval iv, int n) {
  std::vector<double> xs(n);
  for (int k = 0; k < n; ++k) {
    const double c = std::cos(std::numbers::pi * (n - 1 - k) / (n - 1));
    xs[k] = iv.lo + 0.5 * (c + 1.0) * iv.length();
  }
  xs.front() = iv.lo;
  xs.back() = iv.hi;
  return xs;
}

bool BranchFunction::is_increasing(int grid) const {
  double prev = -kInfinity;
  for (const auto& s : segments_) {
    for (double x : chebyshev_grid(s.domain, grid)) {
      const Jet<double> j = s.chain.jet<double>(x);
      if (!(j.d1 > 0.0) || !std::isfinite(j.v) || !std::isfinite(j.d2)) return false;
      if (j.v < prev - kSnapTolerance) return false;
      prev = j.v;
    }
  }
  return true;
}

// ----------------------------------------------------------------------------

BranchFunction then(const BranchFunction& first, const BranchFunction& second) {
  const Interval cod = first.codomain();
  const Interval dom = second.domain();
  if (std::fabs(cod.lo - dom.lo) > kSnapTolerance ||
      std::fabs(cod.hi - dom.hi) > kSnapTolerance) {
    throw Error(ErrorCode::DomainMismatch,
                "codomain [" + std::to_string(cod.lo) + ", " + std::to_string(cod.hi) +
                    "] does not match domain [" + std::to_string(dom.lo) + ", " +
                    std::to_string(dom.hi) + "]");
  }
  std::vector<Segment> out;
  const auto& outer = second.segments();
  for (const auto& s : first.segments()) {
    const double y0 = s.chain.jet<double>(s.domain.lo).v;
    const double y1 = s.chain.jet<double>(s.domain.hi).v;
    double x_lo = s.domain.lo;
    for (std::size_t k = 0; k < outer.size(); ++k) {
      const double b = outer[k].domain.hi;
      const bool last = k + 1 == outer.size();
      if (!last && b <= y0) continue;
      double x_hi = s.domain.hi;
      bool done = true;
      if (!last && b < y1) {
        // Split at the preimage of the outer breakpoint.
        const BranchFunction piece(s.domain, s.chain);
        x_hi = std::clamp(piece.inverse(b), x_lo, s.domain.hi);
        done = false;
      }
      if (x_hi > x_lo) {
        Chain c = s.chain;
        c.append(outer[k].chain);
        out.push_back({{x_lo, x_hi}, std::move(c)});
      }
      x_lo = x_hi;
      if (done) break;
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) out[i].domain.lo = out[i - 1].domain.hi;
  return BranchFunction(std::move(out));
}

BranchFunction compose_chain(std::span<const BranchFunction> fs) {
  if (fs.empty()) {
    throw Error(ErrorCode::DomainMismatch, "nothing to compose");
  }
  BranchFunction acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = then(acc, fs[i]);
  return acc;
}

BranchFunction normalise(const BranchFunction& f) {
  const Interval dom = f.domain();
  const Interval cod = f.codomain();
  const double scale = 1.0 / cod.length();
  return f.precompose_affine(dom.length(), dom.lo)
      .postcompose_affine(scale, -cod.lo * scale);
}

// ----------------------------------------------------------------------------

namespace {

struct SupStats {
  double sup_val = 0.0, sup_d1 = 0.0, sup_d2 = 0.0, inf_d1 = kInfinity;
};

SupStats sample_sups(const BranchFunction& f, int n) {
  SupStats s;
  for (const auto& seg : f.segments()) {
    for (double x : chebyshev_grid(seg.domain, n)) {
      const Jet<double> j = seg.chain.jet<double>(x);
      s.sup_val = std::max(s.sup_val, std::fabs(j.v));
      s.sup_d1 = std::max(s.sup_d1, std::fabs(j.d1));
      s.sup_d2 = std::max(s.sup_d2, std::fabs(j.d2));
      s.inf_d1 = std::min(s.inf_d1, j.d1);
    }
  }
  return s;
}

bool stable(double a, double b) {
  return std::fabs(a - b) <= grid::kSupStability * std::max(std::fabs(a), std::fabs(b)) ||
         std::max(std::fabs(a), std::fabs(b)) < 1e-300;
}

constexpr std::array<double, 4> kGaussNodes = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

}  // namespace

IntervalNorms norms(const BranchFunction& f) {
  int n = grid::kChebyshevPoints;
  SupStats s = sample_sups(f, n);
  for (int r = 0; r < grid::kMaxRefinements; ++r) {
    n = (n - 1) * grid::kRefineFactor + 1;
    const SupStats t = sample_sups(f, n);
    const bool done = stable(s.sup_val, t.sup_val) && stable(s.sup_d1, t.sup_d1) &&
                      stable(s.sup_d2, t.sup_d2) && stable(s.inf_d1, t.inf_d1);
    s = t;
    if (done) break;
  }
  double variation = 0.0;
  const auto& segs = f.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Interval iv = segs[i].domain;
    const double h = iv.length() / grid::kGaussPanels;
    for (int p = 0; p < grid::kGaussPanels; ++p) {
      const double mid = iv.lo + (p + 0.5) * h;
      for (int k = 0; k < 4; ++k) {
        const Jet<double> j = segs[i].chain.jet<double>(mid + 0.5 * h * kGaussNodes[k]);
        variation += 0.5 * h * kGaussWeights[k] * std::fabs(j.d2 / j.d1);
      }
    }
    if (i > 0) {
      const double left = segs[i - 1].chain.jet<double>(iv.lo).d1;
      const double right = segs[i].chain.jet<double>(iv.lo).d1;
      variation += std::fabs(std::log(right / left));
    }
  }
  return {s.sup_val, s.sup_d1, s.sup_d2, s.inf_d1, variation};
}

double cross_ratio(double a, double b, double c, double d) {
  return ((c - a) * (d - b)) / ((c - b) * (d - a));
}

double cross_ratio_distortion(const BranchFunction& f,
                              const std::array<double, 4>& q) {
  if (!(q[0] < q[1] && q[1] < q[2] && q[2] < q[3])) {
    throw Error(ErrorCode::OutOfDomain, "quadruple must be strictly increasing");
  }
  const Interval dom = f.domain();
  if (q[0] < dom.lo || q[3] > dom.hi) {
    throw Error(ErrorCode::OutOfDomain, "quadruple outside the branch domain");
  }
  std::array<double, 4> y{};
  for (int i = 0; i < 4; ++i) y[i] = f.eval(q[i]);
  return cross_ratio(y[0], y[1], y[2], y[3]) / cross_ratio(q[0], q[1], q[2], q[3]);
}

}  // namespace renorm
