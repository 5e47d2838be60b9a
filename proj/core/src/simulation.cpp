#include "rkreg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rkreg/errors.hpp"
#include "rkreg/parallel.hpp"
#include "rkreg/random.hpp"

namespace rkreg {

double true_f(double x) noexcept {
  const double s = std::sin(2.0 * std::numbers::pi * x * x * x);
  return s * s * s;
}

double true_f_prime(double x) noexcept {
  const double phase = 2.0 * std::numbers::pi * x * x * x;
  const double s = std::sin(phase);
  return 18.0 * std::numbers::pi * x * x * std::cos(phase) * s * s;
}

std::vector<SampleRecord> simulate_dataset(std::size_t n, std::uint64_t seed,
                                           double sigma) {
  if (n == 0) throw std::invalid_argument("simulate_dataset: n must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("simulate_dataset: sigma must be finite and >= 0");
  }
  Engine engine(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SampleRecord> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = uniform(engine);
    const double z = normal(engine);
    out.push_back({x, true_f(x) + sigma * z});
  }
  return out;
}

std::string_view to_string(DerivativeEstimator e) noexcept {
  switch (e) {
    case DerivativeEstimator::nw: return "nw";
    case DerivativeEstimator::tilde: return "tilde";
    case DerivativeEstimator::check: return "check";
  }
  return "?";
}

double estimate_derivative(const EstimatorState& state, DerivativeEstimator e,
                           std::size_t i) {
  switch (e) {
    case DerivativeEstimator::nw:
      return state.estimate_f_prime_nw(i);
    case DerivativeEstimator::tilde:
      if (!state.density_model()) {
        throw std::logic_error("tilde estimator needs a design density");
      }
      return state.estimate_f_prime_tilde(i, *state.density_model());
    case DerivativeEstimator::check:
      return state.estimate_f_prime_check(i);
  }
  throw std::logic_error("unknown estimator");
}

double theoretical_clt_variance(DerivativeEstimator e, double x, double alpha,
                                const Kernel& kernel, double sigma) {
  const double g = DensityModel::uniform_unit().g(x);
  if (!(g > 0.0)) {
    throw std::domain_error("design density vanishes at x=" + std::to_string(x));
  }
  const double base = kernel.xi_squared() / ((1.0 + 3.0 * alpha) * g);
  if (e == DerivativeEstimator::nw) return base * sigma * sigma;
  const double f = true_f(x);
  return base * (f * f + sigma * sigma);
}

double clt_scale(std::uint64_t n, double alpha) noexcept {
  return std::pow(static_cast<double>(n), 0.5 * (1.0 - 3.0 * alpha));
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid(33);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = 0.02 + 0.96 * static_cast<double>(i) / 32.0;
  }
  return grid;
}

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("SimConfig: n must be >= 1");
  if (replicates < 1) throw std::invalid_argument("SimConfig: replicates must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("SimConfig: sigma must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("SimConfig: alpha must lie in (0, 1)");
  }
  if (points.empty()) throw std::invalid_argument("SimConfig: no evaluation points");
  for (double x : points) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("SimConfig: evaluation point " + std::to_string(x) +
                                  " lies outside the design support [0, 1]");
    }
  }
}

bool SimConfig::alpha_in_clt_range() const noexcept {
  return alpha > 0.2 && alpha < 1.0 / 3.0;
}

const CltCell& CltResult::cell(DerivativeEstimator e, double x) const {
  for (const auto& c : cells) {
    if (c.estimator == e && c.x == x) return c;
  }
  throw std::out_of_range("no CLT cell for estimator " +
                          std::string(to_string(e)) + " at x=" + std::to_string(x));
}

CltResult run_clt_experiment(const SimConfig& cfg) {
  cfg.validate();
  // The state wants a strictly increasing grid; map requested points onto it.
  std::vector<double> grid = cfg.points;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::size_t> slot(cfg.points.size());
  for (std::size_t p = 0; p < cfg.points.size(); ++p) {
    slot[p] = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), cfg.points[p]) - grid.begin());
  }

  constexpr std::size_t kinds = std::size(kAllDerivativeEstimators);
  const std::size_t m = grid.size();
  // values[r][kind * m + j]
  std::vector<std::vector<double>> values(cfg.replicates);
  const double scale = clt_scale(cfg.n, cfg.alpha);

  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const auto data = simulate_dataset(cfg.n, derive_seed(cfg.seed, r), cfg.sigma);
    EstimatorState state(grid, cfg.kernel, BandwidthSchedule(cfg.alpha),
                         DensityModel::uniform_unit());
    for (const auto& rec : data) state.update(rec);
    std::vector<double> row(kinds * m);
    for (std::size_t k = 0; k < kinds; ++k) {
      for (std::size_t j = 0; j < m; ++j) {
        double v;
        try {
          v = scale * (estimate_derivative(state, kAllDerivativeEstimators[k], j) -
                       true_f_prime(grid[j]));
        } catch (const UnsupportedPoint&) {
          v = std::numeric_limits<double>::quiet_NaN();
        }
        row[k * m + j] = v;
      }
    }
    values[r] = std::move(row);
  });

  CltResult result;
  result.config = cfg;
  for (std::size_t k = 0; k < kinds; ++k) {
    for (std::size_t p = 0; p < cfg.points.size(); ++p) {
      CltCell c;
      c.estimator = kAllDerivativeEstimators[k];
      c.x = cfg.points[p];
      c.normalized.reserve(cfg.replicates);
      for (const auto& row : values) {
        const double v = row[k * m + slot[p]];
        if (!std::isfinite(v)) ++c.guard_failures;
        c.normalized.push_back(v);
      }
      const SampleMoments mom = moments(c.normalized);
      c.emp_mean = mom.mean;
      c.emp_var = mom.variance;
      c.theo_var = theoretical_clt_variance(c.estimator, c.x, cfg.alpha,
                                            cfg.kernel, cfg.sigma);
      c.valid = static_cast<double>(c.guard_failures) <=
                0.01 * static_cast<double>(cfg.replicates);
      c.ad_stat = mom.count > 0 ? anderson_darling(c.normalized, 0.0, c.theo_var)
                                : std::numeric_limits<double>::quiet_NaN();
      result.cells.push_back(std::move(c));
    }
  }
  return result;
}

std::vector<SweepRow> run_convergence_sweep(std::span<const std::size_t> n_list,
                                            std::span<const std::uint64_t> seeds,
                                            double alpha, const Kernel& kernel,
                                            const SweepOptions& options) {
  if (n_list.empty()) throw std::invalid_argument("sweep: empty n list");
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] == 0 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw std::invalid_argument("sweep: n list must be positive and strictly increasing");
    }
  }
  const BandwidthSchedule schedule(alpha);
  constexpr std::size_t kinds = std::size(kAllDerivativeEstimators);
  const std::size_t checkpoints = n_list.size();
  const std::size_t m = options.grid.size();

  struct Partial {
    double sq_error = 0.0;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
    double max_abs = 0.0;
  };
  // partials[s][c * kinds + k]
  std::vector<std::vector<Partial>> partials(seeds.size());

  parallel_for(seeds.size(), options.threads, [&](std::size_t s) {
    const auto data = simulate_dataset(n_list.back(), seeds[s], options.sigma);
    EstimatorState state(options.grid, kernel, schedule,
                         DensityModel::uniform_unit());
    std::vector<Partial> out(checkpoints * kinds);
    std::size_t c = 0;
    for (std::size_t t = 0; t < data.size() && c < checkpoints; ++t) {
      state.update(data[t]);
      if (state.count() != n_list[c]) continue;
      for (std::size_t k = 0; k < kinds; ++k) {
        Partial& p = out[c * kinds + k];
        for (std::size_t j = 0; j < m; ++j) {
          try {
            const double err = estimate_derivative(state, kAllDerivativeEstimators[k], j) -
                               true_f_prime(options.grid[j]);
            p.sq_error += err * err;
            p.max_abs = std::max(p.max_abs, std::abs(err));
            ++p.evaluated;
          } catch (const UnsupportedPoint&) {
            ++p.failures;
          }
        }
      }
      ++c;
    }
    partials[s] = std::move(out);
  });

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < checkpoints; ++c) {
    for (std::size_t k = 0; k < kinds; ++k) {
      SweepRow row;
      row.n = n_list[c];
      row.estimator = kAllDerivativeEstimators[k];
      std::size_t contributing = 0;
      for (const auto& seed_partials : partials) {
        const Partial& p = seed_partials[c * kinds + k];
        row.guard_failures += p.failures;
        row.max_abs_error = std::max(row.max_abs_error, p.max_abs);
        if (p.evaluated == 0) continue;
        row.mse += p.sq_error / static_cast<double>(p.evaluated);
        ++contributing;
      }
      row.mse = contributing > 0 ? row.mse / static_cast<double>(contributing)
                                 : std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace rkreg
