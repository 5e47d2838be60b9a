#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>

namespace rkreg {

enum class KernelKind { gaussian, epanechnikov, custom };

enum class Support {
  unbounded,  ///< mass on the whole real line
  compact,    ///< zero outside [-1, 1]
};

/// Symmetric smoothing kernel K together with K' and the constant
/// xi^2 = integral of (K')^2, which scales the variance of every derivative
/// estimate built on it.
///
/// Built-in kernels are evaluated in closed form. Custom kernels wrap a pair
/// of callables; their xi^2 is integrated once at construction.
class Kernel {
 public:
  using Function = std::function<double(double)>;

  static Kernel gaussian();
  static Kernel epanechnikov();

  /// Throws QuadratureError if (K')^2 cannot be integrated to 1e-10.
  static Kernel custom(std::string name, Function value, Function derivative,
                       Support support);

  /// "gaussian" or "epanechnikov"; throws std::invalid_argument otherwise.
  static Kernel from_name(std::string_view name);

  double operator()(double u) const noexcept { return value(u); }
  double value(double u) const noexcept;
  double derivative(double u) const noexcept;

  struct Pair {
    double value;
    double derivative;
  };
  /// K(u) and K'(u) together, sharing work for the built-in kernels.
  Pair evaluate(double u) const noexcept;

  double xi_squared() const noexcept { return xi_squared_; }
  KernelKind kind() const noexcept { return kind_; }
  Support support() const noexcept { return support_; }
  const std::string& name() const noexcept { return name_; }

  /// |u| beyond which both K(u) and K'(u) evaluate to exactly 0.0.
  double cutoff() const noexcept { return cutoff_; }

  /// Integration window used for moment checks: [-1, 1] or [-40, 40].
  double integration_limit() const noexcept {
    return support_ == Support::compact ? 1.0 : 40.0;
  }

 private:
  Kernel(KernelKind kind, std::string name, Support support, double xi_squared,
         double cutoff)
      : kind_(kind), name_(std::move(name)), support_(support),
        xi_squared_(xi_squared), cutoff_(cutoff) {}

  KernelKind kind_;
  std::string name_;
  Support support_;
  double xi_squared_;
  double cutoff_;
  Function custom_value_;
  Function custom_derivative_;
};

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

inline double Kernel::value(double u) const noexcept {
  switch (kind_) {
    case KernelKind::gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case KernelKind::epanechnikov:
      return (u >= -1.0 && u <= 1.0) ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::custom:
      if (support_ == Support::compact && (u < -1.0 || u > 1.0)) return 0.0;
      return custom_value_(u);
  }
  return 0.0;
}

inline double Kernel::derivative(double u) const noexcept {
  switch (kind_) {
    case KernelKind::gaussian:
      return -u * (kInvSqrt2Pi * std::exp(-0.5 * u * u));
    case KernelKind::epanechnikov:
      // K' jumps at |u| = 1; the boundary takes the outside value.
      return (u > -1.0 && u < 1.0) ? -1.5 * u : 0.0;
    case KernelKind::custom:
      if (support_ == Support::compact && (u <= -1.0 || u >= 1.0)) return 0.0;
      return custom_derivative_(u);
  }
  return 0.0;
}

inline Kernel::Pair Kernel::evaluate(double u) const noexcept {
  switch (kind_) {
    case KernelKind::gaussian: {
      const double k = kInvSqrt2Pi * std::exp(-0.5 * u * u);
      return {k, -u * k};
    }
    case KernelKind::epanechnikov:
      if (u > -1.0 && u < 1.0) return {0.75 * (1.0 - u * u), -1.5 * u};
      return {0.0, 0.0};
    case KernelKind::custom:
      break;
  }
  return {value(u), derivative(u)};
}

}  // namespace rkreg
