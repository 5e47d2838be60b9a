#pragma once

#include <functional>

namespace rkreg {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
};

//! Adaptive Gauss-Kronrod (G7/K15) integration of `fn` over [a, b].
//!
//! [a, b] is first cut into 16 equal pieces; the piece with the largest
//! Kronrod/Gauss discrepancy is then bisected until the summed discrepancy
//! is below `abs_tol`. Throws QuadratureError when more than
//! `max_intervals` pieces would be needed.
QuadratureResult integrate(const std::function<double(double)>& fn,
                           double a,
                           double b,
                           double abs_tol = 1e-10,
                           int max_intervals = 20000);

}  // namespace rkreg
