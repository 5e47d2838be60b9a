#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rkreg/estimator.hpp"
#include "rkreg/kernel.hpp"
#include "rkreg/normality.hpp"

namespace rkreg {

/// Test regression function on [0, 1]: sin(2 pi x^3)^3.
double true_f(double x) noexcept;
/// Its derivative: 18 pi x^2 cos(2 pi x^3) sin(2 pi x^3)^2.
double true_f_prime(double x) noexcept;

/// X ~ Uniform(0, 1), Y = true_f(X) + sigma * Z with Z ~ N(0, 1), all iid.
/// Deterministic in `seed`.
std::vector<SampleRecord> simulate_dataset(std::size_t n, std::uint64_t seed,
                                           double sigma = 1.0);

enum class DerivativeEstimator { nw, tilde, check };

inline constexpr DerivativeEstimator kAllDerivativeEstimators[] = {
    DerivativeEstimator::nw, DerivativeEstimator::tilde,
    DerivativeEstimator::check};

std::string_view to_string(DerivativeEstimator e) noexcept;

/// Derivative estimate of kind `e` at grid index i. tilde and check need the
/// state's density model.
double estimate_derivative(const EstimatorState& state, DerivativeEstimator e,
                           std::size_t i);

/// Limit variance of sqrt(n h_n^3) (estimate - f'(x)) under the uniform
/// design: xi^2 sigma^2 / (1 + 3 alpha) for nw, and
/// xi^2 (f(x)^2 + sigma^2) / (1 + 3 alpha) for tilde and check.
/// Throws std::domain_error where the design density vanishes.
double theoretical_clt_variance(DerivativeEstimator e, double x, double alpha,
                                const Kernel& kernel, double sigma = 1.0);

/// sqrt(n h_n^3) with h_n = n^(-alpha), computed as n^((1 - 3 alpha) / 2).
double clt_scale(std::uint64_t n, double alpha) noexcept;

/// 33 equally spaced points on [0.02, 0.98].
std::vector<double> default_sweep_grid();

struct SimConfig {
  std::size_t n = 10000;
  std::size_t replicates = 2000;
  std::uint64_t seed = 20240601;
  double alpha = 0.32;
  Kernel kernel = Kernel::gaussian();
  std::vector<double> points{0.4, 0.9};
  double sigma = 1.0;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  void validate() const;
  /// True when 1/5 < alpha < 1/3, the range where the limit law holds.
  bool alpha_in_clt_range() const noexcept;
};

struct CltCell {
  DerivativeEstimator estimator = DerivativeEstimator::nw;
  double x = 0.0;
  std::vector<double> normalized;  ///< one per replicate; NaN on guard failure
  double emp_mean = 0.0;
  double emp_var = 0.0;
  double theo_var = 0.0;
  double ad_stat = 0.0;
  std::size_t guard_failures = 0;
  bool valid = true;  ///< false when more than 1% of replicates failed

  bool normality_rejected() const noexcept {
    return !(ad_stat <= kAndersonDarlingCritical1pct);
  }
};

struct CltResult {
  SimConfig config;
  std::vector<CltCell> cells;  ///< estimator-major: nw, tilde, check per point

  const CltCell& cell(DerivativeEstimator e, double x) const;
};

/// Monte-Carlo check of the limit law. Replicate r streams
/// simulate_dataset(n, derive_seed(seed, r), sigma) into a fresh state on
/// the evaluation points. Output is identical for any thread count.
CltResult run_clt_experiment(const SimConfig& cfg);

struct SweepRow {
  std::size_t n = 0;
  DerivativeEstimator estimator = DerivativeEstimator::nw;
  double mse = 0.0;  ///< mean over seeds of the grid-averaged squared error
  double max_abs_error = 0.0;  ///< largest |error| over grid and seeds
  std::size_t guard_failures = 0;
};

struct SweepOptions {
  double sigma = 1.0;
  std::vector<double> grid = default_sweep_grid();
  unsigned threads = 0;
};

/// Mean squared error over the grid as n grows. Each seed drives a single
/// stream observed at every n in `n_list` (strictly increasing).
std::vector<SweepRow> run_convergence_sweep(std::span<const std::size_t> n_list,
                                            std::span<const std::uint64_t> seeds,
                                            double alpha, const Kernel& kernel,
                                            const SweepOptions& options = {});

}  // namespace rkreg
