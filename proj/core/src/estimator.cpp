#include "rkreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rkreg/errors.hpp"

namespace rkreg {

BandwidthSchedule::BandwidthSchedule(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("bandwidth exponent must lie in (0, 1), got " +
                                std::to_string(alpha));
  }
}

double BandwidthSchedule::bandwidth(std::uint64_t k) const {
  if (k == 0) throw std::invalid_argument("bandwidth index is 1-based");
  return std::pow(static_cast<double>(k), -alpha_);
}

DensityModel DensityModel::uniform_unit() {
  return {[](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; },
          [](double) { return 0.0; }};
}

const char* to_string(Accumulator a) noexcept {
  switch (a) {
    case Accumulator::response: return "response";
    case Accumulator::density: return "density";
    case Accumulator::response_slope: return "response_slope";
    case Accumulator::density_slope: return "density_slope";
    case Accumulator::design_response: return "design_response";
    case Accumulator::design_response_slope: return "design_response_slope";
  }
  return "?";
}

std::optional<Real> AccumulatorValues::get(Accumulator a) const {
  switch (a) {
    case Accumulator::response: return response;
    case Accumulator::density: return density;
    case Accumulator::response_slope: return response_slope;
    case Accumulator::density_slope: return density_slope;
    case Accumulator::design_response: return design_response;
    case Accumulator::design_response_slope: return design_response_slope;
  }
  return std::nullopt;
}

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("evaluation grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) {
      throw std::invalid_argument("evaluation grid has a non-finite entry");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("evaluation grid must be strictly increasing");
    }
  }
}

// Positive design density at x, or throws.
double design_density(const DensityModel& density, double x) {
  const double gx = density.g(x);
  if (!(gx > 0.0) || !std::isfinite(gx)) {
    throw RejectedSample("design density g(" + std::to_string(x) +
                         ") = " + std::to_string(gx) + " is not positive");
  }
  return gx;
}

}  // namespace

EstimatorState::EstimatorState(std::vector<double> grid, Kernel kernel,
                               BandwidthSchedule schedule,
                               std::optional<DensityModel> density)
    : grid_(std::move(grid)),
      kernel_(std::move(kernel)),
      schedule_(schedule),
      density_(std::move(density)) {
  check_grid(grid_);
  const std::size_t m = grid_.size();
  response_.assign(m, 0);
  density_acc_.assign(m, 0);
  response_slope_.assign(m, 0);
  density_slope_.assign(m, 0);
  if (density_) {
    if (!density_->g || !density_->g_prime) {
      throw std::invalid_argument("density model needs both g and g'");
    }
    design_response_.assign(m, 0);
    design_response_slope_.assign(m, 0);
  }
}

void EstimatorState::update(const SampleRecord& rec) {
  if (!std::isfinite(rec.x) || !std::isfinite(rec.y)) {
    throw RejectedSample("sample has a non-finite coordinate");
  }
  const Real inv_g = density_ ? 1.0L / design_density(*density_, rec.x) : 0;

  const std::uint64_t n = n_ + 1;
  const double h = schedule_.bandwidth(n);
  const Real inv_h = 1.0L / static_cast<Real>(h);
  const Real keep = static_cast<Real>(n - 1) / static_cast<Real>(n);
  const Real inv_n = 1.0L / static_cast<Real>(n);
  const Real y = rec.y;
  const double cutoff = kernel_.cutoff();
  const bool weighted = density_.has_value();

  for (std::size_t i = 0; i < grid_.size(); ++i) {
    response_[i] *= keep;
    density_acc_[i] *= keep;
    response_slope_[i] *= keep;
    density_slope_[i] *= keep;
    if (weighted) {
      design_response_[i] *= keep;
      design_response_slope_[i] *= keep;
    }

    const double u = (grid_[i] - rec.x) / h;
    // K and K' are exactly zero past the cutoff, so skipping is bit-identical.
    if (std::abs(u) > cutoff) continue;

    const Kernel::Pair k = kernel_.evaluate(u);
    const Real level = static_cast<Real>(k.value) * inv_h;
    const Real slope = static_cast<Real>(k.derivative) * inv_h * inv_h;
    response_[i] += inv_n * (y * level);
    density_acc_[i] += inv_n * level;
    response_slope_[i] += inv_n * (y * slope);
    density_slope_[i] += inv_n * slope;
    if (weighted) {
      design_response_[i] += inv_n * (y * inv_g * level);
      design_response_slope_[i] += inv_n * (y * inv_g * slope);
    }
  }
  n_ = n;
}

std::span<const Real> EstimatorState::accumulator(Accumulator a) const noexcept {
  switch (a) {
    case Accumulator::response: return response_;
    case Accumulator::density: return density_acc_;
    case Accumulator::response_slope: return response_slope_;
    case Accumulator::density_slope: return density_slope_;
    case Accumulator::design_response: return design_response_;
    case Accumulator::design_response_slope: return design_response_slope_;
  }
  return {};
}

void EstimatorState::require_samples() const {
  if (n_ == 0) throw std::logic_error("estimate requested before any sample");
}

double EstimatorState::guarded_density(std::size_t i) const {
  const Real g = density_acc_.at(i);
  if (g < kDensityGuard) {
    throw UnsupportedPoint(grid_[i], static_cast<double>(g));
  }
  return static_cast<double>(g);
}

double EstimatorState::estimate_f(std::size_t i) const {
  require_samples();
  guarded_density(i);
  return static_cast<double>(response_[i] / density_acc_[i]);
}

double EstimatorState::estimate_f_prime_nw(std::size_t i) const {
  require_samples();
  guarded_density(i);
  const Real g = density_acc_[i];
  return static_cast<double>(response_slope_[i] / g -
                             response_[i] * density_slope_[i] / (g * g));
}

double EstimatorState::estimate_f_prime_tilde(
    std::size_t i, const DensityModel& density) const {
  require_samples();
  const double x = grid_.at(i);
  const double gx = density.g(x);
  if (!(gx > 0.0)) throw UnsupportedPoint(x, gx);
  const Real g = gx;
  return static_cast<double>(response_slope_[i] / g -
                             response_[i] * static_cast<Real>(density.g_prime(x)) /
                                 (g * g));
}

double EstimatorState::estimate_f_prime_check(std::size_t i) const {
  require_samples();
  if (!density_) {
    throw std::logic_error(
        "state was built without a design density; no design-weighted "
        "accumulators");
  }
  return static_cast<double>(design_response_slope_.at(i));
}

EstimatorState EstimatorState::restore(
    std::vector<double> grid, Kernel kernel, BandwidthSchedule schedule,
    std::optional<DensityModel> density, std::uint64_t n,
    std::vector<std::vector<Real>> accumulators) {
  EstimatorState s(std::move(grid), std::move(kernel), schedule,
                   std::move(density));
  const std::size_t expected = s.has_density() ? 6 : 4;
  if (accumulators.size() != expected) {
    throw std::invalid_argument("snapshot has " +
                                std::to_string(accumulators.size()) +
                                " accumulators, expected " +
                                std::to_string(expected));
  }
  for (const auto& acc : accumulators) {
    if (acc.size() != s.size()) {
      throw std::invalid_argument("snapshot accumulator length mismatch");
    }
    for (Real v : acc) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("snapshot accumulator is not finite");
      }
      if (n == 0 && v != 0) {
        throw std::invalid_argument("empty snapshot with nonzero accumulator");
      }
    }
  }
  s.n_ = n;
  s.response_ = std::move(accumulators[0]);
  s.density_acc_ = std::move(accumulators[1]);
  s.response_slope_ = std::move(accumulators[2]);
  s.density_slope_ = std::move(accumulators[3]);
  if (expected == 6) {
    s.design_response_ = std::move(accumulators[4]);
    s.design_response_slope_ = std::move(accumulators[5]);
  }
  if (std::any_of(s.density_acc_.begin(), s.density_acc_.end(),
                  [](Real v) { return v < 0; })) {
    throw std::invalid_argument("snapshot density accumulator is negative");
  }
  return s;
}

AccumulatorValues batch_oracle(std::span<const SampleRecord> records,
                               const Kernel& kernel,
                               const BandwidthSchedule& schedule,
                               const std::optional<DensityModel>& density,
                               double x) {
  if (records.empty()) throw std::invalid_argument("batch oracle needs records");
  Real response = 0, dens = 0, response_slope = 0, density_slope = 0;
  Real design = 0, design_slope = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const SampleRecord& rec = records[k];
    if (!std::isfinite(rec.x) || !std::isfinite(rec.y)) {
      throw RejectedSample("sample has a non-finite coordinate");
    }
    const Real h = schedule.bandwidth(k + 1);
    const double u = (x - rec.x) / static_cast<double>(h);
    const Real kv = kernel.value(u);
    const Real dk = kernel.derivative(u);
    response += rec.y * kv / h;
    dens += kv / h;
    response_slope += rec.y * dk / (h * h);
    density_slope += dk / (h * h);
    if (density) {
      const Real g = design_density(*density, rec.x);
      design += rec.y * kv / (g * h);
      design_slope += rec.y * dk / (g * h * h);
    }
  }
  const Real n = static_cast<Real>(records.size());
  AccumulatorValues out;
  out.response = response / n;
  out.density = dens / n;
  out.response_slope = response_slope / n;
  out.density_slope = density_slope / n;
  if (density) {
    out.design_response = design / n;
    out.design_response_slope = design_slope / n;
  }
  return out;
}

}  // namespace rkreg
