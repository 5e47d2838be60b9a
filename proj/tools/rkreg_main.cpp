// rkreg: recursive kernel regression and derivative estimation.
//
// Exit codes: 0 ok, 1 data error, 2 usage error, 3 selftest failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rkreg/cross_validation.hpp"
#include "rkreg/errors.hpp"
#include "rkreg/random.hpp"
#include "rkreg/selftest.hpp"
#include "rkreg/simulation.hpp"
#include "rkreg/snapshot.hpp"
#include "rkreg/tsv.hpp"
#include "rkreg/valvometry.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSelftest = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kKernelNames{"gaussian", "epanechnikov"};

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw rkreg::DataError("cannot write " + path);
  fn(out);
}

struct SimulateArgs {
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  double sigma = 1.0;
  std::string output;
};

struct CltArgs {
  std::size_t n = 10000;
  std::size_t replicates = 2000;
  double alpha = 0.32;
  std::string kernel = "gaussian";
  std::vector<double> points{0.4, 0.9};
  std::uint64_t seed = 20240601;
  double sigma = 1.0;
  unsigned threads = 0;
  std::string output;
  std::string histogram_prefix;
  std::size_t histogram_bins = 40;
};

struct CvArgs {
  std::string input;
  std::string mode = "predictive";
  std::string kernel = "gaussian";
  std::vector<double> alphas = rkreg::default_alpha_grid();
  bool no_constraint = false;
  std::size_t max_eval = 500;
  std::uint64_t seed = 7;
  unsigned threads = 0;
  std::string output;
};

struct SweepArgs {
  std::vector<std::size_t> n_list{1000, 10000, 100000};
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
  double alpha = 0.32;
  std::string kernel = "gaussian";
  double sigma = 1.0;
  unsigned threads = 0;
  std::string output;
};

struct GapeArgs {
  std::string input;
  double alpha = 0.32;
  std::string kernel = "gaussian";
  std::size_t bins = 288;
  std::int64_t tz_offset = 0;
  int min_animal = 1;
  int max_animal = 16;
  unsigned threads = 0;
  std::string output;  // directory (estimate) or prefix (heatmap)
  std::string snapshot_dir;
  std::string resume_dir;
};

void add_gape_options(CLI::App* cmd, GapeArgs& a) {
  cmd->add_option("--input", a.input, "CSV with timestamp,animal_id,distance_mm")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--alpha", a.alpha, "bandwidth exponent, h_n = n^-alpha")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--kernel", a.kernel)->check(CLI::IsMember(kKernelNames));
  cmd->add_option("--bins", a.bins, "time bins per day")->check(CLI::PositiveNumber);
  cmd->add_option("--tz-offset", a.tz_offset, "seconds added to UTC before day split");
  cmd->add_option("--min-animal", a.min_animal);
  cmd->add_option("--max-animal", a.max_animal);
  cmd->add_option("--threads", a.threads, "0 = all cores");
}

rkreg::DayEstimateOptions day_options(const GapeArgs& a) {
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  rkreg::DayEstimateOptions o;
  o.alpha = a.alpha;
  o.kernel = rkreg::Kernel::from_name(a.kernel);
  o.bins = a.bins;
  o.tz_offset_seconds = a.tz_offset;
  return o;
}

rkreg::IngestResult ingest(const GapeArgs& a) {
  rkreg::IngestOptions o;
  o.min_animal = a.min_animal;
  o.max_animal = a.max_animal;
  o.tz_offset_seconds = a.tz_offset;
  auto data = rkreg::ingest_csv(fs::path(a.input), o);
  std::cerr << "ingested " << data.record_count() << " records in "
            << data.partitions.size() << " (day, animal) partitions; "
            << data.malformed << " malformed rows skipped\n";
  return data;
}

std::string partition_name(std::int64_t day, int animal) {
  return "day" + std::to_string(day) + "_animal" + std::to_string(animal);
}

int run_simulate(const SimulateArgs& a) {
  const auto data = rkreg::simulate_dataset(a.n, a.seed, a.sigma);
  with_output(a.output, [&](std::ostream& out) { rkreg::write_xy_csv(out, data); });
  return kExitOk;
}

int run_clt(const CltArgs& a) {
  rkreg::SimConfig cfg;
  cfg.n = a.n;
  cfg.replicates = a.replicates;
  cfg.alpha = a.alpha;
  cfg.kernel = rkreg::Kernel::from_name(a.kernel);
  cfg.points = a.points;
  cfg.seed = a.seed;
  cfg.sigma = a.sigma;
  cfg.threads = a.threads;
  if (!cfg.alpha_in_clt_range()) {
    std::cerr << "warning: alpha=" << a.alpha
              << " is outside (1/5, 1/3); the normal limit is not guaranteed\n";
  }
  const auto result = rkreg::run_clt_experiment(cfg);
  with_output(a.output, [&](std::ostream& out) { rkreg::write_clt_tsv(out, result); });
  for (const auto& cell : result.cells) {
    if (!cell.valid) {
      std::cerr << "warning: " << rkreg::to_string(cell.estimator) << " at x=" << cell.x
                << " invalid (" << cell.guard_failures << " guard failures)\n";
    }
    if (!a.histogram_prefix.empty()) {
      const std::string path = a.histogram_prefix + "_" +
                               std::string(rkreg::to_string(cell.estimator)) + "_x" +
                               rkreg::format_double(cell.x) + ".tsv";
      const auto bins = rkreg::histogram(cell.normalized, a.histogram_bins);
      with_output(path, [&](std::ostream& out) { rkreg::write_histogram_tsv(out, bins); });
    }
  }
  return kExitOk;
}

int run_cv(const CvArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw rkreg::DataError("cannot open " + a.input);
  const auto records = rkreg::read_xy_csv(in);
  try {
    rkreg::validate_alpha_grid(a.alphas);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--alphas: ") + e.what());
  }
  rkreg::CvOptions options;
  options.constrain = !a.no_constraint;
  options.max_evaluations = a.max_eval;
  options.seed = a.seed;
  options.threads = a.threads;
  const auto kernel = rkreg::Kernel::from_name(a.kernel);
  const auto report =
      a.mode == "oracle"
          ? rkreg::cv_oracle(records, kernel, a.alphas, rkreg::true_f_prime, options)
          : rkreg::cv_predictive(records, kernel, a.alphas, options);
  with_output(a.output, [&](std::ostream& out) { out << rkreg::to_json(report); });
  return kExitOk;
}

int run_sweep(const SweepArgs& a) {
  std::vector<std::uint64_t> seeds(a.seeds);
  for (std::size_t s = 0; s < a.seeds; ++s) seeds[s] = rkreg::derive_seed(a.seed, s);
  rkreg::SweepOptions options;
  options.sigma = a.sigma;
  options.threads = a.threads;
  std::vector<std::size_t> n_list = a.n_list;
  const auto kernel = rkreg::Kernel::from_name(a.kernel);
  std::vector<rkreg::SweepRow> rows;
  try {
    rows = rkreg::run_convergence_sweep(n_list, seeds, a.alpha, kernel, options);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  with_output(a.output, [&](std::ostream& out) {
    rkreg::write_sweep_tsv(out, rows, a.alpha, kernel.name());
  });
  return kExitOk;
}

int run_estimate(const GapeArgs& a) {
  const auto options = day_options(a);
  const auto data = ingest(a);
  fs::create_directories(a.output);
  if (!a.snapshot_dir.empty()) fs::create_directories(a.snapshot_dir);

  std::vector<rkreg::DayVelocityGrid> grids;
  for (const auto& [key, records] : data.partitions) {
    const std::string name = partition_name(key.day, key.animal_id);
    std::unique_ptr<rkreg::EstimatorState> state;
    const fs::path resume = a.resume_dir.empty() ? fs::path() : fs::path(a.resume_dir) / (name + ".json");
    if (!resume.empty() && fs::exists(resume)) {
      state = std::make_unique<rkreg::EstimatorState>(rkreg::load_snapshot(resume));
      const auto grid = rkreg::day_grid(options.bins);
      if (state->kernel().name() != options.kernel.name() ||
          state->schedule().alpha() != options.alpha ||
          !std::equal(grid.begin(), grid.end(), state->grid().begin(), state->grid().end())) {
        throw rkreg::DataError(resume.string() + " was produced with different settings");
      }
    } else {
      state = std::make_unique<rkreg::EstimatorState>(rkreg::new_day_state(options));
    }
    rkreg::stream_day(*state, records, key.day, options.tz_offset_seconds);
    if (!a.snapshot_dir.empty()) {
      rkreg::save_snapshot(*state, fs::path(a.snapshot_dir) / (name + ".json"));
    }
    if (state->count() < rkreg::kMinRecordsPerDay) {
      std::cerr << "skipping " << name << ": only " << state->count() << " records\n";
      continue;
    }
    grids.push_back(rkreg::velocity_from_state(*state, key.day, key.animal_id));
  }
  if (grids.empty()) throw rkreg::DataError("no (day, animal) partition had enough records");
  rkreg::assign_tercile_classes(grids);
  for (const auto& g : grids) {
    const fs::path path = fs::path(a.output) / (partition_name(g.day, g.animal_id) + ".tsv");
    with_output(path.string(), [&](std::ostream& out) { rkreg::write_velocity_tsv(out, g); });
  }
  std::cerr << "wrote " << grids.size() << " velocity files to " << a.output << '\n';
  return kExitOk;
}

int run_heatmap(const GapeArgs& a) {
  const auto options = day_options(a);
  const auto data = ingest(a);
  const auto batch = rkreg::estimate_all(data, options, a.threads);
  for (const auto& [key, why] : batch.failures) std::cerr << "skipped: " << why << '\n';
  if (batch.grids.empty()) throw rkreg::DataError("no (day, animal) partition had enough records");
  const auto files = rkreg::export_heatmap(batch.grids, a.output);
  std::cerr << "wrote " << files.velocity.string() << " and " << files.classes.string() << '\n';
  return kExitOk;
}

int run_selftest() {
  bool ok = true;
  for (const auto& check : rkreg::run_selftest()) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << " (" << check.seconds
              << " s): " << check.detail << '\n';
    ok = ok && check.passed;
  }
  return ok ? kExitOk : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive Nadaraya-Watson regression and derivative estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "draw a data set from the test model");
  simulate->add_option("--n", sim.n)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--sigma", sim.sigma)->check(CLI::NonNegativeNumber);
  simulate->add_option("--output,-o", sim.output, "x,y CSV (default stdout)");

  CltArgs clt;
  auto* clt_cmd = app.add_subcommand("clt", "Monte-Carlo check of the derivative limit law");
  clt_cmd->add_option("--n", clt.n, "samples per replicate")->check(CLI::PositiveNumber);
  clt_cmd->add_option("--N", clt.replicates, "replicates")->check(CLI::PositiveNumber);
  clt_cmd->add_option("--alpha", clt.alpha)->check(CLI::Range(0.0, 1.0));
  clt_cmd->add_option("--kernel", clt.kernel)->check(CLI::IsMember(kKernelNames));
  clt_cmd->add_option("--x", clt.points, "evaluation points")->delimiter(',');
  clt_cmd->add_option("--seed", clt.seed);
  clt_cmd->add_option("--sigma", clt.sigma)->check(CLI::PositiveNumber);
  clt_cmd->add_option("--threads", clt.threads);
  clt_cmd->add_option("--output,-o", clt.output, "TSV (default stdout)");
  clt_cmd->add_option("--histogram-prefix", clt.histogram_prefix,
                      "write <prefix>_<estimator>_x<point>.tsv histograms");
  clt_cmd->add_option("--histogram-bins", clt.histogram_bins)->check(CLI::PositiveNumber);

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "cross-validated choice of alpha");
  cv_cmd->add_option("--input", cv.input, "x,y CSV")->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("--mode", cv.mode)->check(CLI::IsMember({"oracle", "predictive"}));
  cv_cmd->add_option("--kernel", cv.kernel)->check(CLI::IsMember(kKernelNames));
  cv_cmd->add_option("--alphas", cv.alphas)->delimiter(',');
  cv_cmd->add_flag("--no-constraint", cv.no_constraint, "allow alpha >= 1/3");
  cv_cmd->add_option("--max-eval", cv.max_eval, "leave-one-out points per alpha (0 = all)");
  cv_cmd->add_option("--seed", cv.seed);
  cv_cmd->add_option("--threads", cv.threads);
  cv_cmd->add_option("--output,-o", cv.output, "JSON (default stdout)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid MSE of the derivative estimators versus n");
  sweep_cmd->add_option("--n-list", sweep.n_list)->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "number of seeds")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep.seed, "master seed");
  sweep_cmd->add_option("--alpha", sweep.alpha)->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--kernel", sweep.kernel)->check(CLI::IsMember(kKernelNames));
  sweep_cmd->add_option("--sigma", sweep.sigma)->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--threads", sweep.threads);
  sweep_cmd->add_option("--output,-o", sweep.output, "TSV (default stdout)");

  GapeArgs est;
  auto* estimate = app.add_subcommand("estimate", "per-day gape velocity for each animal");
  add_gape_options(estimate, est);
  estimate->add_option("--output-dir", est.output, "directory for velocity TSVs")->required();
  estimate->add_option("--snapshot-dir", est.snapshot_dir, "save estimator states here");
  estimate->add_option("--resume-dir", est.resume_dir, "continue from states saved here");

  GapeArgs heat;
  auto* heatmap = app.add_subcommand("heatmap", "day x time-bin velocity matrices");
  add_gape_options(heatmap, heat);
  heatmap->add_option("--output", heat.output, "path prefix for the TSV pair")->required();

  app.add_subcommand("selftest", "run the built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*clt_cmd) return run_clt(clt);
    if (*cv_cmd) return run_cv(cv);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*estimate) return run_estimate(est);
    if (*heatmap) return run_heatmap(heat);
    return run_selftest();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rkreg::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const rkreg::RejectedSample& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
