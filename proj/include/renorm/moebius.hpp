#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace renorm {

// Points of the projective line are plain doubles; any infinity stands for
// the single point at infinity.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline bool is_infinite(double x) { return std::isinf(x); }

namespace tol {
inline constexpr double kConstruction = 1e-12;
inline constexpr double kClassification = 1e-10;
inline constexpr double kGeometric = 1e-9;
}  // namespace tol

enum class MoebiusClass { Hyperbolic, Parabolic, Elliptic, Identity };
const char* to_string(MoebiusClass c);

struct FixedPoint {
  double x;           // may be infinite
  double derivative;  // multiplier of the map at x
};

// An element of PSL(2,R), stored as its determinant-one representative whose
// first nonzero entry among (a, b, c) is positive.
class Moebius {
 public:
  Moebius() = default;
  Moebius(double a, double b, double c, double d);

  static Moebius identity() { return {}; }
  // x -> lambda * x + t, lambda > 0.
  static Moebius affine(double lambda, double t);
  // The matrix diag(lambda, 1/lambda); acts as x -> lambda^2 x.
  static Moebius diagonal(double lambda);
  // Rotation matrix (cos, sin; -sin, cos).
  static Moebius rotation(double angle);

  double a() const { return m_[0]; }
  double b() const { return m_[1]; }
  double c() const { return m_[2]; }
  double d() const { return m_[3]; }
  const std::array<double, 4>& entries() const { return m_; }
  double norm() const;

  double apply(double x) const;
  template <class T>
  T eval(T x, int order) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  Moebius compose(const Moebius& inner) const;  // this o inner
  Moebius inverse() const;
  Moebius conjugate(const Moebius& g) const;  // g this g^{-1}

  double trace() const { return std::fabs(m_[0] + m_[3]); }
  MoebiusClass classify() const;
  bool is_identity() const;
  bool is_affine(double tol = tol::kGeometric) const;
  std::vector<FixedPoint> fixed_points() const;

  double distance(const Moebius& other) const;  // max entrywise

  friend Moebius operator*(const Moebius& x, const Moebius& y) {
    return x.compose(y);
  }

 private:
  void canonicalise();
  std::array<double, 4> m_{1.0, 0.0, 0.0, 1.0};
};

Moebius compose(const Moebius& outer, const Moebius& inner);
Moebius inverse(const Moebius& m);
double trace(const Moebius& m);
std::vector<FixedPoint> fixed_points(const Moebius& m);

// Trace of a hyperbolic element whose multiplier at a fixed point is c.
double trace_from_break_size(double c);

// The unique Moebius map sending x_i to y_i (i = 0,1,2), or an error when the
// triples are not both strictly increasing.
Moebius moebius_through(const std::array<double, 3>& x,
                        const std::array<double, 3>& y);

template <class T>
T Moebius::eval(T x, int order) const {
  const T a = m_[0], b = m_[1], c = m_[2], d = m_[3];
  const T den = c * x + d;
  switch (order) {
    case 0: return (a * x + b) / den;
    case 1: return T(1) / (den * den);
    default: return T(-2) * c / (den * den * den);
  }
}

}  // namespace renorm
