#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rkreg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Random configurations (n <= 1000, both kernels, alpha in {0.21, 0.32}):
/// every accumulator of the streaming state must match batch_oracle to
/// relative 1e-12 at every grid point.
CheckResult check_streaming_batch(std::uint64_t seed = 1, int configs = 100);

/// xi^2 of the built-in kernels and the kernel moment conditions under
/// quadrature (tolerance 1e-6).
CheckResult check_kernel_constants();

/// Squared regression function at 0.4 and 0.9 against 0.0036 and 0.9489.
CheckResult check_ground_truth();

std::vector<CheckResult> run_selftest();

}  // namespace rkreg
