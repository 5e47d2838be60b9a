#include "rkreg/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rkreg/errors.hpp"
#include "rkreg/parallel.hpp"
#include "rkreg/random.hpp"
#include "rkreg/tsv.hpp"

namespace rkreg {
namespace {

constexpr std::size_t kMinRecords = 50;

// Leave-one-out estimate with a precomputed bandwidth table (size n - 1).
LooEstimate loo_with_table(std::span<const SampleRecord> records, std::size_t k,
                           const Kernel& kernel, std::span<const double> bandwidths) {
  const double x = records[k].x;
  const double cutoff = kernel.cutoff();
  Real response = 0, density = 0, response_slope = 0, density_slope = 0;
  for (std::size_t j = 0; j < records.size(); ++j) {
    if (j == k) continue;
    const double h = bandwidths[j < k ? j : j - 1];
    const double u = (x - records[j].x) / h;
    if (std::abs(u) > cutoff) continue;
    const Kernel::Pair kv = kernel.evaluate(u);
    const Real level = static_cast<Real>(kv.value) / h;
    const Real slope = static_cast<Real>(kv.derivative) / (static_cast<Real>(h) * h);
    response += records[j].y * level;
    density += level;
    response_slope += records[j].y * slope;
    density_slope += slope;
  }
  const Real m = static_cast<Real>(records.size() - 1);
  const Real g = density / m;
  if (g < kDensityGuard) throw UnsupportedPoint(x, static_cast<double>(g));
  // The 1/(n-1) factors cancel in both ratios.
  return {static_cast<double>(response / density),
          static_cast<double>(response_slope / density -
                              response * density_slope / (density * density))};
}

std::vector<double> bandwidth_table(std::size_t count, double alpha) {
  const BandwidthSchedule schedule(alpha);
  std::vector<double> h(count);
  for (std::size_t i = 0; i < count; ++i) h[i] = schedule.bandwidth(i + 1);
  return h;
}

std::vector<std::size_t> evaluation_indices(std::size_t n, const CvOptions& options) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (options.max_evaluations == 0 || n <= options.max_evaluations) return all;
  std::vector<std::size_t> picked;
  picked.reserve(options.max_evaluations);
  Engine engine(options.seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked),
              options.max_evaluations, engine);
  return picked;
}

enum class Criterion { oracle, predictive };

CvReport run_cv(std::span<const SampleRecord> records, const Kernel& kernel,
                std::span<const double> alphas, Criterion criterion,
                const std::function<double(double)>& true_f_prime,
                const CvOptions& options) {
  if (records.size() < kMinRecords) {
    throw DataError("cross-validation needs at least " +
                    std::to_string(kMinRecords) + " records, got " +
                    std::to_string(records.size()));
  }
  validate_alpha_grid(alphas);
  for (const auto& r : records) {
    if (!std::isfinite(r.x) || !std::isfinite(r.y)) {
      throw RejectedSample("cross-validation input has a non-finite record");
    }
  }

  const auto points = evaluation_indices(records.size(), options);
  const std::size_t p = points.size();
  std::vector<std::vector<double>> tables;
  tables.reserve(alphas.size());
  for (double a : alphas) tables.push_back(bandwidth_table(records.size() - 1, a));

  // errors[a * p + i]: squared error, NaN when the point was guarded out.
  std::vector<double> errors(alphas.size() * p);
  parallel_for(errors.size(), options.threads, [&](std::size_t idx) {
    const std::size_t a = idx / p;
    const std::size_t k = points[idx % p];
    try {
      const LooEstimate est = loo_with_table(records, k, kernel, tables[a]);
      const double diff = criterion == Criterion::oracle
                              ? est.slope - true_f_prime(records[k].x)
                              : est.level - records[k].y;
      errors[idx] = diff * diff;
    } catch (const UnsupportedPoint&) {
      errors[idx] = std::numeric_limits<double>::quiet_NaN();
    }
  });

  CvReport report;
  report.criterion = criterion == Criterion::oracle ? "oracle" : "predictive";
  report.kernel = kernel.name();
  report.n = records.size();
  report.evaluation_points = p;
  report.constrained = options.constrain;

  for (std::size_t a = 0; a < alphas.size(); ++a) {
    CvScore s;
    s.alpha = alphas[a];
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double e = errors[a * p + i];
      if (std::isnan(e)) {
        ++s.skipped;
      } else {
        sum += e;
        ++s.evaluated;
      }
    }
    s.valid = s.evaluated > 0 &&
              static_cast<double>(s.skipped) <= 0.1 * static_cast<double>(p);
    s.score = s.evaluated > 0 ? sum / static_cast<double>(s.evaluated)
                              : std::numeric_limits<double>::quiet_NaN();
    report.scores.push_back(s);
  }

  // Strict < keeps the smaller alpha on ties.
  const CvScore* best = nullptr;
  const CvScore* best_any = nullptr;
  for (const auto& s : report.scores) {
    if (!s.valid) continue;
    if (!best_any || s.score < best_any->score) best_any = &s;
    if (options.constrain && !(s.alpha < 1.0 / 3.0)) continue;
    if (!best || s.score < best->score) best = &s;
  }
  if (!best) {
    throw DataError("cross-validation: no admissible alpha (all invalid or constrained out)");
  }
  report.selected_alpha = best->alpha;
  report.clipped = options.constrain && best_any && !(best_any->alpha < 1.0 / 3.0);
  return report;
}

}  // namespace

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.20 + 0.02 * i);
  return grid;
}

void validate_alpha_grid(std::span<const double> alphas) {
  if (alphas.empty()) throw std::invalid_argument("alpha grid is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) {
      throw std::invalid_argument("alpha grid entries must lie in (0, 1)");
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw std::invalid_argument("alpha grid must be strictly increasing");
    }
  }
}

LooEstimate leave_one_out(std::span<const SampleRecord> records, std::size_t k,
                          const Kernel& kernel, double alpha) {
  if (records.size() < 2) throw std::invalid_argument("leave-one-out needs two records");
  if (k >= records.size()) throw std::out_of_range("leave-one-out index");
  return loo_with_table(records, k, kernel, bandwidth_table(records.size() - 1, alpha));
}

CvReport cv_oracle(std::span<const SampleRecord> records, const Kernel& kernel,
                   std::span<const double> alphas,
                   const std::function<double(double)>& true_f_prime,
                   const CvOptions& options) {
  if (!true_f_prime) throw std::invalid_argument("cv_oracle needs the true derivative");
  return run_cv(records, kernel, alphas, Criterion::oracle, true_f_prime, options);
}

CvReport cv_predictive(std::span<const SampleRecord> records,
                       const Kernel& kernel, std::span<const double> alphas,
                       const CvOptions& options) {
  return run_cv(records, kernel, alphas, Criterion::predictive, {}, options);
}

std::string to_json(const CvReport& report) {
  const auto num = [](double v) {
    return std::isfinite(v) ? format_double(v) : std::string("null");
  };
  std::ostringstream out;
  out << "{\n"
      << "  \"criterion\": \"" << report.criterion << "\",\n"
      << "  \"kernel\": \"" << report.kernel << "\",\n"
      << "  \"n\": " << report.n << ",\n"
      << "  \"evaluation_points\": " << report.evaluation_points << ",\n"
      << "  \"constrained\": " << (report.constrained ? "true" : "false") << ",\n"
      << "  \"selected_alpha\": " << num(report.selected_alpha) << ",\n"
      << "  \"clipped\": " << (report.clipped ? "true" : "false") << ",\n"
      << "  \"scores\": [";
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    const auto& s = report.scores[i];
    out << (i ? ",\n" : "\n") << "    {\"alpha\": " << num(s.alpha)
        << ", \"score\": " << num(s.score) << ", \"evaluated\": " << s.evaluated
        << ", \"skipped\": " << s.skipped
        << ", \"valid\": " << (s.valid ? "true" : "false") << "}";
  }
  out << "\n  ]\n}\n";
  return out.str();
}

}  // namespace rkreg
