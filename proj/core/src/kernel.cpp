#include "rkreg/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rkreg/errors.hpp"
#include "rkreg/quadrature.hpp"

namespace rkreg {

UnsupportedPoint::UnsupportedPoint(double x, double density)
    : std::domain_error("unsupported point x=" + std::to_string(x) +
                        ": estimated design density " +
                        std::to_string(density) + " below guard"),
      x_(x),
      density_(density) {}

Kernel Kernel::gaussian() {
  // integral of (u phi(u))^2 du = 1 / (4 sqrt(pi))
  return Kernel(KernelKind::gaussian, "gaussian", Support::unbounded,
                0.25 / std::sqrt(std::numbers::pi), 40.0);
}

Kernel Kernel::epanechnikov() {
  return Kernel(KernelKind::epanechnikov, "epanechnikov", Support::compact,
                1.5, 1.0);
}

Kernel Kernel::custom(std::string name, Function value, Function derivative,
                      Support support) {
  if (!value || !derivative) {
    throw std::invalid_argument("custom kernel needs both K and K'");
  }
  const double limit = support == Support::compact ? 1.0 : 40.0;
  const auto sq = [&derivative](double u) {
    const double d = derivative(u);
    return d * d;
  };
  const double xi2 = integrate(sq, -limit, limit, 1e-10).value;
  if (!(xi2 > 0.0)) {
    throw QuadratureError("custom kernel '" + name +
                          "' has a vanishing derivative energy");
  }
  Kernel k(KernelKind::custom, std::move(name), support, xi2,
           support == Support::compact
               ? 1.0
               : std::numeric_limits<double>::infinity());
  k.custom_value_ = std::move(value);
  k.custom_derivative_ = std::move(derivative);
  return k;
}

Kernel Kernel::from_name(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "epanechnikov") return epanechnikov();
  throw std::invalid_argument("unknown kernel '" + std::string(name) +
                              "' (expected gaussian or epanechnikov)");
}

}  // namespace rkreg
