#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace legfol {

using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Horizontal vectors are stored through their R^4 projection, in the
/// coordinate order (x1, y1, x2, y2).
using HVec = Vec4;

/// A point of R^5 in coordinates (x1, y1, x2, y2, t).
struct Point5 {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  double t = 0.0;

  static Point5 from(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  static Point5 from(const Vec4& q, double t) { return {q[0], q[1], q[2], q[3], t}; }

  Vec5 vec() const {
    Vec5 v;
    v << x1, y1, x2, y2, t;
    return v;
  }
  Vec4 base() const { return Vec4(x1, y1, x2, y2); }

  bool finite() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && std::isfinite(t);
  }
};

inline Vec5 lift5(const Vec4& v, double t_component) {
  Vec5 out;
  out << v, t_component;
  return out;
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure did not reach its postcondition.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace legfol
