#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace kvf {

// Second-order forward-mode value: scalar plus exact gradient and Hessian
// with respect to the chart coordinates. Every rule below writes the Hessian
// as a sum of entrywise-symmetric terms, so symmetry holds bitwise, not just
// within rounding.
//
// Domain restrictions (log, sqrt, division, pow at zero) are checked by the
// expression evaluator, which owns the offending subexpression text; the
// functions here assume arguments are inside the domain.
struct Jet2 {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;

  Jet2() = default;
  explicit Jet2(int n) : v(0.0), g(Eigen::VectorXd::Zero(n)), h(Eigen::MatrixXd::Zero(n, n)) {}

  static Jet2 constant(double c, int n) {
    Jet2 j(n);
    j.v = c;
    return j;
  }
  static Jet2 variable(double x, int index, int n) {
    Jet2 j(n);
    j.v = x;
    j.g(index) = 1.0;
    return j;
  }

  int dim() const { return static_cast<int>(g.size()); }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(a.dim());
  r.v = -a.v;
  r.g = -a.g;
  r.h = -a.h;
  return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.v = a.v * b.v;
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.v = a.v / b.v;
  r.g = (a.g - r.v * b.g) / b.v;
  r.h = (a.h - r.v * b.h - (r.g * b.g.transpose() + b.g * r.g.transpose())) / b.v;
  return r;
}

// Lift of a smooth univariate function given value and first two derivatives
// at a.v: h-term f1*a.h + f2*g*g^T keeps bitwise symmetry.
inline Jet2 lift(const Jet2& a, double f0, double f1, double f2) {
  Jet2 r(a.dim());
  r.v = f0;
  r.g = f1 * a.g;
  r.h = f1 * a.h + f2 * (a.g * a.g.transpose());
  return r;
}

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return lift(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return lift(a, c, -s, -c);
}
inline Jet2 tan(const Jet2& a) {
  const double t = std::tan(a.v), d = 1.0 + t * t;
  return lift(a, t, d, 2.0 * t * d);
}
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return lift(a, e, e, e);
}
inline Jet2 log(const Jet2& a) {
  const double inv = 1.0 / a.v;
  return lift(a, std::log(a.v), inv, -inv * inv);
}
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v), inv = 0.5 / s;
  return lift(a, s, inv, -0.5 * inv / a.v);
}
inline Jet2 sinh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return lift(a, s, c, s);
}
inline Jet2 cosh(const Jet2& a) {
  const double s = std::sinh(a.v), c = std::cosh(a.v);
  return lift(a, c, s, c);
}

// a^p with literal exponent p. The caller has ruled out negative bases with
// non-integer p and zero bases with p < 2 (where derivatives blow up).
inline Jet2 pow(const Jet2& a, double p) {
  if (p == 0.0) return Jet2::constant(1.0, a.dim());
  if (p == 1.0) return a;
  const double f0 = std::pow(a.v, p);
  const double f1 = p * std::pow(a.v, p - 1.0);
  const double f2 = p * (p - 1.0) * std::pow(a.v, p - 2.0);
  return lift(a, f0, f1, f2);
}

}  // namespace kvf
