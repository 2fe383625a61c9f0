#include "renorm/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "renorm/error.hpp"

namespace renorm {

const char* to_string(MoebiusClass c) {
  switch (c) {
    case MoebiusClass::Hyperbolic: return "hyperbolic";
    case MoebiusClass::Parabolic: return "parabolic";
    case MoebiusClass::Elliptic: return "elliptic";
    case MoebiusClass::Identity: return "identity";
  }
  return "unknown";
}

Moebius::Moebius(double a, double b, double c, double d) {
  const double det = a * d - b * c;
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::NonMonotone,
                "matrix determinant must be positive, got " + std::to_string(det));
  }
  const double s = 1.0 / std::sqrt(det);
  m_ = {a * s, b * s, c * s, d * s};
  canonicalise();
}

void Moebius::canonicalise() {
  // Canonical sign: first entry of (a, b, c) that is not negligible is positive.
  const double scale = norm();
  for (int i = 0; i < 3; ++i) {
    if (std::fabs(m_[i]) > 1e-14 * scale) {
      if (m_[i] < 0) {
        for (double& e : m_) e = -e;
      }
      break;
    }
  }
}

Moebius Moebius::affine(double lambda, double t) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::NonMonotone, "affine slope must be positive");
  }
  const double r = std::sqrt(lambda);
  return Moebius(r, t / r, 0.0, 1.0 / r);
}

Moebius Moebius::diagonal(double lambda) {
  return Moebius(lambda, 0.0, 0.0, 1.0 / lambda);
}

Moebius Moebius::rotation(double angle) {
  return Moebius(std::cos(angle), std::sin(angle), -std::sin(angle),
                 std::cos(angle));
}

double Moebius::norm() const {
  double n = 0.0;
  for (double e : m_) n = std::max(n, std::fabs(e));
  return n;
}

double Moebius::apply(double x) const {
  const auto [a, b, c, d] = m_;
  if (is_infinite(x)) {
    return c == 0.0 ? kInfinity : a / c;
  }
  const double den = c * x + d;
  if (den == 0.0) return kInfinity;
  return (a * x + b) / den;
}

double Moebius::derivative(double x) const {
  const double den = m_[2] * x + m_[3];
  if (den == 0.0) {
    throw Error(ErrorCode::PoleAt, "derivative requested at the pole x=" +
                                       std::to_string(x));
  }
  return 1.0 / (den * den);
}

double Moebius::second_derivative(double x) const {
  const double den = m_[2] * x + m_[3];
  if (den == 0.0) {
    throw Error(ErrorCode::PoleAt, "second derivative requested at the pole");
  }
  return -2.0 * m_[2] / (den * den * den);
}

Moebius Moebius::compose(const Moebius& inner) const {
  const auto [a, b, c, d] = m_;
  const auto [e, f, g, h] = inner.m_;
  const std::array<double, 4> p{a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h};
  // Long words: ad - bc cancels catastrophically once the entries are large,
  // while the exact determinant is still one. Keep the product as is then.
  const double n2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
  if (n2 * std::numeric_limits<double>::epsilon() > 1e-6) {
    Moebius out;
    out.m_ = p;
    out.canonicalise();
    return out;
  }
  return Moebius(p[0], p[1], p[2], p[3]);
}

Moebius Moebius::inverse() const {
  Moebius out;
  out.m_ = {m_[3], -m_[1], -m_[2], m_[0]};
  out.canonicalise();
  return out;
}

Moebius Moebius::conjugate(const Moebius& g) const {
  return g.compose(*this).compose(g.inverse());
}

bool Moebius::is_identity() const {
  return std::fabs(m_[1]) < tol::kConstruction &&
         std::fabs(m_[2]) < tol::kConstruction &&
         std::fabs(m_[0] - 1.0) < tol::kConstruction;
}

MoebiusClass Moebius::classify() const {
  const double t = trace();
  if (t > 2.0 + tol::kClassification) return MoebiusClass::Hyperbolic;
  if (t < 2.0 - tol::kClassification) return MoebiusClass::Elliptic;
  return is_identity() ? MoebiusClass::Identity : MoebiusClass::Parabolic;
}

bool Moebius::is_affine(double tol) const {
  return std::fabs(m_[2]) <= tol * norm();
}

std::vector<FixedPoint> Moebius::fixed_points() const {
  if (is_identity()) {
    throw Error(ErrorCode::IdentityMap, "every point is fixed by the identity");
  }
  const auto [a, b, c, d] = m_;
  std::vector<FixedPoint> out;
  if (std::fabs(c) <= 1e-15 * norm()) {
    // Affine: x -> (a x + b)/d fixes infinity with multiplier d/a.
    if (std::fabs(d - a) > 1e-15 * norm()) {
      const double x = b / (d - a);
      out.push_back({x, (a / d)});
    }
    out.push_back({kInfinity, d / a});
    std::sort(out.begin(), out.end(),
              [](const FixedPoint& p, const FixedPoint& q) { return p.x < q.x; });
    return out;
  }
  // c x^2 + (d - a) x - b = 0, discriminant (a + d)^2 - 4.
  const double tr = a + d;
  const double disc = tr * tr - 4.0;
  if (disc < -tol::kClassification) return out;
  const double p = d - a;
  if (disc <= tol::kClassification) {
    const double x = -p / (2.0 * c);
    out.push_back({x, derivative(x)});
    return out;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (p + std::copysign(sq, p == 0.0 ? 1.0 : p));
  double x1 = q / c;
  double x2 = -b / q;
  if (x1 > x2) std::swap(x1, x2);
  out.push_back({x1, derivative(x1)});
  out.push_back({x2, derivative(x2)});
  return out;
}

double Moebius::distance(const Moebius& other) const {
  double dist = 0.0;
  for (int i = 0; i < 4; ++i) {
    dist = std::max(dist, std::fabs(m_[i] - other.m_[i]));
  }
  return dist;
}

Moebius compose(const Moebius& outer, const Moebius& inner) {
  return outer.compose(inner);
}
Moebius inverse(const Moebius& m) { return m.inverse(); }
double trace(const Moebius& m) { return m.trace(); }
std::vector<FixedPoint> fixed_points(const Moebius& m) {
  return m.fixed_points();
}

double trace_from_break_size(double c) {
  if (!(c > 0.0)) {
    throw Error(ErrorCode::DegenerateBreak, "break size must be positive");
  }
  if (std::fabs(c - 1.0) < tol::kConstruction) {
    throw Error(ErrorCode::DegenerateBreak, "break size equals 1");
  }
  const double r = std::sqrt(c);
  return r + 1.0 / r;
}

namespace {

// Matrix of the map sending (p0, p1, p2) to (0, 1, infinity).
std::array<double, 4> to_standard(const std::array<double, 3>& p) {
  const double u = p[1] - p[2];
  const double v = p[1] - p[0];
  return {u, -p[0] * u, v, -p[2] * v};
}

bool strictly_increasing(const std::array<double, 3>& p) {
  return p[0] < p[1] && p[1] < p[2];
}

}  // namespace

Moebius moebius_through(const std::array<double, 3>& x,
                        const std::array<double, 3>& y) {
  if (!strictly_increasing(x) || !strictly_increasing(y)) {
    throw Error(ErrorCode::DegenerateTriple,
                "interpolation triples must be strictly increasing");
  }
  const auto hx = to_standard(x);
  const auto hy = to_standard(y);
  // Scale each matrix to unit determinant before composing to keep the
  // entries well conditioned.
  const Moebius mx(hx[0], hx[1], hx[2], hx[3]);
  const Moebius my(hy[0], hy[1], hy[2], hy[3]);
  return my.inverse().compose(mx);
}

}  // namespace renorm
