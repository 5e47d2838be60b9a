#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rkreg/kernel.hpp"

namespace rkreg {

/// Accumulators are carried in the widest native floating type.
using Real = long double;

/// Estimated design densities below this are treated as "no data here".
inline constexpr double kDensityGuard = 1e-8;

/// Deterministic bandwidth schedule h_k = k^(-alpha), 0 < alpha < 1.
class BandwidthSchedule {
 public:
  explicit BandwidthSchedule(double alpha);

  double alpha() const noexcept { return alpha_; }
  /// Bandwidth for the k-th sample (1-based).
  double bandwidth(std::uint64_t k) const;

 private:
  double alpha_;
};

/// Known design density g and its derivative, for the estimators that
/// replace the Parzen-Rosenblatt denominator by the truth.
struct DensityModel {
  std::function<double(double)> g;
  std::function<double(double)> g_prime;

  /// Uniform on [0, 1]: g = 1 and g' = 0 inside, g = 0 outside.
  static DensityModel uniform_unit();
};

struct SampleRecord {
  double x = 0.0;
  double y = 0.0;
};

enum class Accumulator {
  response,            ///< (1/n) sum Y_k/h_k K(.)
  density,             ///< (1/n) sum 1/h_k K(.)
  response_slope,      ///< (1/n) sum Y_k/h_k^2 K'(.)
  density_slope,       ///< (1/n) sum 1/h_k^2 K'(.)
  design_response,     ///< (1/n) sum Y_k/(g(X_k) h_k) K(.)
  design_response_slope,  ///< (1/n) sum Y_k/(g(X_k) h_k^2) K'(.)
};

inline constexpr Accumulator kAllAccumulators[] = {
    Accumulator::response,        Accumulator::density,
    Accumulator::response_slope,  Accumulator::density_slope,
    Accumulator::design_response, Accumulator::design_response_slope};

const char* to_string(Accumulator a) noexcept;

/// The six running means evaluated at a single point. The two
/// design-weighted entries are empty when no density model is supplied.
struct AccumulatorValues {
  Real response = 0;
  Real density = 0;
  Real response_slope = 0;
  Real density_slope = 0;
  std::optional<Real> design_response;
  std::optional<Real> design_response_slope;

  std::optional<Real> get(Accumulator a) const;
};

/// Recursive kernel regression state on a fixed grid of evaluation points.
///
/// Each update rescales every accumulator by (n-1)/n and adds the new
/// sample's term divided by n, with h_n taken at the new count. Memory and
/// per-sample cost are both O(grid size). Updates must be sequential; const
/// member functions may run concurrently with each other.
class EstimatorState {
 public:
  EstimatorState(std::vector<double> grid, Kernel kernel,
                 BandwidthSchedule schedule,
                 std::optional<DensityModel> density = std::nullopt);

  /// Adds one sample. Throws RejectedSample (state unchanged) if the record
  /// is non-finite or the attached density is not positive at rec.x.
  void update(const SampleRecord& rec);

  std::uint64_t count() const noexcept { return n_; }
  std::span<const double> grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }
  const Kernel& kernel() const noexcept { return kernel_; }
  const BandwidthSchedule& schedule() const noexcept { return schedule_; }
  bool has_density() const noexcept { return density_.has_value(); }
  const std::optional<DensityModel>& density_model() const noexcept {
    return density_;
  }

  /// Empty span for the design-weighted accumulators when no density model
  /// is attached.
  std::span<const Real> accumulator(Accumulator a) const noexcept;

  /// Nadaraya-Watson level estimate H/G at grid index i.
  double estimate_f(std::size_t i) const;
  /// Derivative of the Nadaraya-Watson ratio: H'/G - H G'/G^2.
  double estimate_f_prime_nw(std::size_t i) const;
  /// Derivative with the true design density in the denominator:
  /// H'/g - H g'/g^2.
  double estimate_f_prime_tilde(std::size_t i,
                                const DensityModel& density) const;
  /// Running mean of Y_k K'(.) / (g(X_k) h_k^2); requires a density model.
  double estimate_f_prime_check(std::size_t i) const;

  /// Rebuilds a state from previously saved accumulators. Validates lengths
  /// and finiteness; used by snapshot loading.
  static EstimatorState restore(std::vector<double> grid, Kernel kernel,
                                BandwidthSchedule schedule,
                                std::optional<DensityModel> density,
                                std::uint64_t n,
                                std::vector<std::vector<Real>> accumulators);

 private:
  void require_samples() const;
  double guarded_density(std::size_t i) const;

  std::vector<double> grid_;
  Kernel kernel_;
  BandwidthSchedule schedule_;
  std::optional<DensityModel> density_;
  std::uint64_t n_ = 0;
  std::vector<Real> response_;
  std::vector<Real> density_acc_;
  std::vector<Real> response_slope_;
  std::vector<Real> density_slope_;
  std::vector<Real> design_response_;
  std::vector<Real> design_response_slope_;
};

/// Direct-summation evaluation of all accumulators at x over `records` in
/// arrival order, h_k = k^(-alpha). No recursion; serves as the reference
/// the streaming state is checked against.
AccumulatorValues batch_oracle(std::span<const SampleRecord> records,
                               const Kernel& kernel,
                               const BandwidthSchedule& schedule,
                               const std::optional<DensityModel>& density,
                               double x);

}  // namespace rkreg
