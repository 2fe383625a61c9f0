#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "renorm/moebius.hpp"

namespace renorm {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  double at(double s) const { return lo + s * (hi - lo); }
  bool contains(double x, double slack = 0.0) const {
    return x >= lo - slack && x <= hi + slack;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Value and first two derivatives at a point.
template <class T>
struct Jet {
  T v;
  T d1;
  T d2;
};

// x -> lambda x + t
struct AffinePiece {
  double lambda = 1.0;
  double t = 0.0;
};

struct MoebiusPiece {
  Moebius m;
};

// Bump perturbation x -> x + amplitude * h * B_shape((x - lo)/h) on [lo, hi],
// identity elsewhere, h = hi - lo. The bumps vanish to third order at both
// ends, so gluing onto the identity is C^3.
// With `inverted` set the piece is the inverse of that map (solved by
// Newton; derivatives by implicit differentiation).
struct PerturbPiece {
  double amplitude = 0.0;
  int shape = 0;
  double lo = 0.0;
  double hi = 1.0;
  bool inverted = false;
};

using Piece = std::variant<AffinePiece, MoebiusPiece, PerturbPiece>;

inline constexpr int kBumpShapeCount = 3;
// Polynomial bump profile B_shape(u) = 256 u^4 (1-u)^4 p_shape(u) with
// p_0 = 1, p_1 = 4u - 2, p_2 = 2u; returns B, B', B'' at u in [0,1].
template <class T>
std::array<T, 3> bump_profile(int shape, T u) {
  const T w = T(1) - u;
  const T g = u * u * u * u * w * w * w * w;
  const T g1 = T(4) * u * u * u * w * w * w * (w - u);
  const T g2 = T(12) * u * u * w * w * (w - u) * (w - u) - T(8) * u * u * u * w * w * w;
  T p = 1, p1 = 0;
  if (shape == 1) {
    p = T(4) * u - T(2);
    p1 = 4;
  } else if (shape == 2) {
    p = T(2) * u;
    p1 = 2;
  }
  return {T(256) * g * p, T(256) * (g1 * p + g * p1),
          T(256) * (g2 * p + T(2) * g1 * p1)};
}
// sup over [0,1] of |B_shape'|.
double bump_max_slope(int shape);

template <class T>
Jet<T> eval_piece(const Piece& piece, T x);

// A composition of primitive pieces, applied front to back. Adjacent
// affine/Moebius pieces are multiplied out on insertion.
class Chain {
 public:
  Chain() = default;
  explicit Chain(std::vector<Piece> pieces);

  void push_back(const Piece& piece);  // apply `piece` after the current chain
  void push_front(const Piece& piece);
  void append(const Chain& then);  // this followed by `then`

  std::span<const Piece> pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  bool is_moebius() const;  // at most one affine/Moebius piece, no bumps
  Moebius as_moebius() const;  // valid when is_moebius()

  template <class T>
  Jet<T> jet(T x) const;

 private:
  std::vector<Piece> pieces_;
};

struct Segment {
  Interval domain;
  Chain chain;
};

// Monotone function on a closed interval, given piecewise by composition
// chains on consecutive segments. Branches of smooth GIETs have one segment;
// projected 2-interval maps carry several.
class BranchFunction {
 public:
  BranchFunction() = default;
  BranchFunction(Interval domain, Chain chain);
  explicit BranchFunction(std::vector<Segment> segments);

  static BranchFunction identity(Interval domain);
  static BranchFunction moebius(Interval domain, const Moebius& m);
  static BranchFunction affine(Interval domain, double lambda, double t);

  Interval domain() const;
  Interval codomain() const;
  const std::vector<Segment>& segments() const { return segments_; }
  bool single_chain() const { return segments_.size() == 1; }
  const Chain& chain() const { return segments_.front().chain; }
  bool is_moebius() const;
  Moebius as_moebius() const;
  std::size_t total_pieces() const;

  double eval(double x, int order = 0) const;
  template <class T>
  Jet<T> jet(T x) const;
  Jet<double> jet(double x) const { return jet<double>(x); }

  double inverse(double y) const;
  BranchFunction restrict(Interval sub) const;

  // Pre/post composition with affine maps u -> lambda u + t.
  BranchFunction precompose_affine(double lambda, double t) const;
  BranchFunction postcompose_affine(double lambda, double t) const;

  // Strict monotonicity probe on a Chebyshev grid of each segment.
  bool is_increasing(int grid = 64) const;

 private:
  const Segment& segment_for(double x) const;
  std::vector<Segment> segments_;
};

// Composition in list order: fs[0] is applied first. Codomain of each must
// match the domain of the next within kSnapTolerance.
inline constexpr double kSnapTolerance = 1e-10;
BranchFunction compose_chain(std::span<const BranchFunction> fs);
BranchFunction then(const BranchFunction& first, const BranchFunction& second);

// Rescales domain and codomain to [0,1] with increasing affine maps.
BranchFunction normalise(const BranchFunction& f);

struct IntervalNorms {
  double sup_val = 0.0;
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double inf_d1 = 0.0;
  double log_d1_variation = 0.0;  // integral of |D log Df|
};

namespace grid {
inline constexpr int kChebyshevPoints = 64;
inline constexpr int kRefineFactor = 4;
inline constexpr int kMaxRefinements = 2;
inline constexpr double kSupStability = 1e-4;
inline constexpr int kGaussPanels = 64;  // x 4 nodes = 256 evaluations
}  // namespace grid

std::vector<double> chebyshev_grid(Interval iv, int n);
IntervalNorms norms(const BranchFunction& f);

double cross_ratio(double a, double b, double c, double d);
double cross_ratio_distortion(const BranchFunction& f,
                              const std::array<double, 4>& quad);

// ----------------------------------------------------------------------------

template <class T>
Jet<T> eval_piece(const Piece& piece, T x) {
  if (const auto* af = std::get_if<AffinePiece>(&piece)) {
    return {T(af->lambda) * x + T(af->t), T(af->lambda), T(0)};
  }
  if (const auto* mp = std::get_if<MoebiusPiece>(&piece)) {
    return {mp->m.eval(x, 0), mp->m.eval(x, 1), mp->m.eval(x, 2)};
  }
  const auto& pp = std::get<PerturbPiece>(piece);
  if (x <= T(pp.lo) || x >= T(pp.hi)) return {x, T(1), T(0)};
  const T h = T(pp.hi) - T(pp.lo);
  const T eps = pp.amplitude;
  auto forward = [&](T z) -> Jet<T> {
    const auto b = bump_profile<T>(pp.shape, (z - T(pp.lo)) / h);
    return {z + eps * h * b[0], T(1) + eps * b[1], eps * b[2] / h};
  };
  if (!pp.inverted) return forward(x);
  // Safeguarded Newton; the forward derivative stays above 1/2.
  T lo = pp.lo, hi = pp.hi, z = x;
  Jet<T> f = forward(z);
  for (int it = 0; it < 100; ++it) {
    const T r = f.v - x;
    if (r > T(0)) hi = z; else lo = z;
    T next = z - r / f.d1;
    if (!(next > lo && next < hi)) next = (lo + hi) / T(2);
    const bool done = std::fabs(static_cast<double>(next - z)) <=
                      1e-18 * std::max(1.0, std::fabs(static_cast<double>(z)));
    z = next;
    f = forward(z);
    if (done) break;
  }
  const T inv = T(1) / f.d1;
  return {z, inv, -f.d2 * inv * inv * inv};
}

template <class T>
Jet<T> Chain::jet(T x) const {
  Jet<T> acc{x, T(1), T(0)};
  for (const Piece& p : pieces_) {
    const Jet<T> q = eval_piece<T>(p, acc.v);
    acc = {q.v, q.d1 * acc.d1, q.d2 * acc.d1 * acc.d1 + q.d1 * acc.d2};
  }
  return acc;
}

template <class T>
Jet<T> BranchFunction::jet(T x) const {
  return segment_for(static_cast<double>(x)).chain.template jet<T>(x);
}

}  // namespace renorm
