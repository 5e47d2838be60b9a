#include "rkreg/normality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rkreg {

double normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double anderson_darling(std::span<const double> sample, double mean,
                        double variance) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("Anderson-Darling needs a positive variance");
  }
  std::vector<double> z;
  z.reserve(sample.size());
  for (double v : sample) {
    if (std::isfinite(v)) z.push_back((v - mean) / std::sqrt(variance));
  }
  if (z.empty()) throw std::invalid_argument("Anderson-Darling on empty sample");
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  const double nd = static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // log Phi(z_i) + log(1 - Phi(z_{n-1-i})), clamped away from log(0)
    const double lower = std::max(normal_cdf(z[i]), 1e-300);
    const double upper = std::max(normal_cdf(-z[n - 1 - i]), 1e-300);
    s += (2.0 * static_cast<double>(i) + 1.0) *
         (std::log(lower) + std::log(upper));
  }
  return -nd - s / nd;
}

std::vector<HistogramBin> histogram(std::span<const double> sample,
                                    std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  double lo = INFINITY, hi = -INFINITY;
  for (double v : sample) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<HistogramBin> out;
  if (!(lo <= hi)) return out;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  out.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.push_back({lo + width * static_cast<double>(b),
                   b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1),
                   0});
  }
  for (double v : sample) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

SampleMoments moments(std::span<const double> sample) {
  SampleMoments m;
  double m2 = 0.0;
  for (double v : sample) {
    if (!std::isfinite(v)) continue;
    ++m.count;
    const double delta = v - m.mean;
    m.mean += delta / static_cast<double>(m.count);
    m2 += delta * (v - m.mean);
  }
  m.variance = m.count > 1 ? m2 / static_cast<double>(m.count - 1) : 0.0;
  return m;
}

}  // namespace rkreg
