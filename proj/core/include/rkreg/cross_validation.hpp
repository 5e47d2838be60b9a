#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rkreg/estimator.hpp"
#include "rkreg/kernel.hpp"

namespace rkreg {

/// {0.20, 0.22, ..., 0.40}
std::vector<double> default_alpha_grid();

/// Throws std::invalid_argument unless nonempty, strictly increasing, in (0,1).
void validate_alpha_grid(std::span<const double> alphas);

struct CvOptions {
  /// Restrict the choice to alpha < 1/3, where the convergence results hold.
  bool constrain = true;
  /// Leave-one-out points scored per alpha; a seeded uniform subsample is
  /// drawn when the data set is larger.
  std::size_t max_evaluations = 500;
  std::uint64_t seed = 7;
  unsigned threads = 0;
};

struct CvScore {
  double alpha = 0.0;
  double score = 0.0;         ///< mean squared error over evaluated points
  std::size_t evaluated = 0;
  std::size_t skipped = 0;    ///< points that hit the density guard
  bool valid = true;          ///< false when more than 10% were skipped
};

struct CvReport {
  std::string criterion;  ///< "oracle" or "predictive"
  std::string kernel;
  std::size_t n = 0;
  std::size_t evaluation_points = 0;
  bool constrained = true;
  std::vector<CvScore> scores;
  double selected_alpha = 0.0;
  /// The unconstrained minimiser violated alpha < 1/3 and was passed over.
  bool clipped = false;
};

struct LooEstimate {
  double level = 0.0;  ///< Nadaraya-Watson estimate of f
  double slope = 0.0;  ///< its derivative estimate of f'
};

/// Estimates at records[k].x from every other record, in the original order,
/// with the bandwidth schedule re-indexed 1..n-1. Throws UnsupportedPoint
/// when the estimated density at that point is below the guard.
LooEstimate leave_one_out(std::span<const SampleRecord> records, std::size_t k,
                          const Kernel& kernel, double alpha);

/// Scores alpha by mean (f'_(-k)(X_k) - f'(X_k))^2 against a known derivative.
CvReport cv_oracle(std::span<const SampleRecord> records, const Kernel& kernel,
                   std::span<const double> alphas,
                   const std::function<double(double)>& true_f_prime,
                   const CvOptions& options = {});

/// Data-driven surrogate: mean (f_(-k)(X_k) - Y_k)^2 using the level
/// estimate, for data whose derivative is unknown.
CvReport cv_predictive(std::span<const SampleRecord> records,
                       const Kernel& kernel, std::span<const double> alphas,
                       const CvOptions& options = {});

std::string to_json(const CvReport& report);

}  // namespace rkreg
