#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mmris {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error taxonomy. Invalid arguments use std::invalid_argument directly.

/// A call was made whose documented precondition does not hold
/// (e.g. a channel requested between two nodes that cannot see each other).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two nodes share a position, so distances and angles are undefined.
class SingularGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero channel handed to the beamforming solver.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario parsing or validation failure; `what()` carries the field path.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Wraps an angle into [0, 2π).
inline double wrap_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Shortest distance between two angles on the circle, in [0, π].
inline double circular_distance(double a, double b) {
  double d = std::fabs(wrap_two_pi(a) - wrap_two_pi(b));
  return std::min(d, kTwoPi - d);
}

}  // namespace mmris
