#pragma once

#include <stdexcept>
#include <string>

namespace rkreg {

/// A sample that cannot enter an estimator (non-finite value, or a design
/// point where the attached density vanishes). The state is left untouched.
class RejectedSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The estimated design density at a grid point is below the guard
/// threshold, so ratio estimates there are not defined.
class UnsupportedPoint : public std::domain_error {
 public:
  UnsupportedPoint(double x, double density);

  double x() const noexcept { return x_; }
  double density() const noexcept { return density_; }

 private:
  double x_;
  double density_;
};

/// Adaptive quadrature hit its subdivision limit without meeting tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that is structurally unusable (missing columns, mostly
/// malformed rows, too few records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rkreg
