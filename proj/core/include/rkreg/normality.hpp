#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rkreg {

/// Anderson-Darling A^2 of `sample` against the fully specified
/// N(mean, variance). Non-finite entries are ignored.
double anderson_darling(std::span<const double> sample, double mean,
                        double variance);

/// Asymptotic 1% critical value of A^2 when no parameter is estimated.
inline constexpr double kAndersonDarlingCritical1pct = 3.857;

double normal_cdf(double z) noexcept;

struct HistogramBin {
  double left;
  double right;
  std::size_t count;
};

/// Equal-width histogram over [min, max] of the finite entries. The last bin
/// is closed on the right.
std::vector<HistogramBin> histogram(std::span<const double> sample,
                                    std::size_t bins);

struct SampleMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
};

/// Mean and unbiased variance of the finite entries (Welford).
SampleMoments moments(std::span<const double> sample);

}  // namespace rkreg
