#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rkreg/simulation.hpp"
#include "support/oracles.hpp"

using rkreg::DerivativeEstimator;
using rkreg::Kernel;
using rkreg::testing::central_difference;
using rkreg::testing::ref_f;

TEST_CASE("regression function") {
  CHECK(rkreg::true_f(0.0) == 0.0);
  CHECK(std::fabs(std::pow(rkreg::true_f(0.4), 2) - 0.0036) < 0.0002);
  CHECK(std::fabs(std::pow(rkreg::true_f(0.9), 2) - 0.9489) < 0.0002);
  CHECK(rkreg::true_f_prime(0.0) == 0.0);
  CHECK(rkreg::true_f_prime(0.5) ==
        doctest::Approx(18.0 * std::numbers::pi * 0.25 * std::cos(std::numbers::pi / 4) *
                        std::pow(std::sin(std::numbers::pi / 4), 2)));
  CHECK(std::fabs(rkreg::true_f_prime(0.5) - 4.998) < 1e-3);

  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> unit;
  for (int i = 0; i < 1000; ++i) {
    const double x = unit(eng);
    CHECK(rkreg::true_f(x) == doctest::Approx(ref_f(x)).epsilon(1e-14));
    CHECK(std::fabs(rkreg::true_f_prime(x) - central_difference(ref_f, x)) < 1e-4);
  }
}

TEST_CASE("simulated datasets") {
  const auto clean = rkreg::simulate_dataset(1000, 3, 0.0);
  for (const auto& r : clean) {
    CHECK(r.x >= 0.0);
    CHECK(r.x < 1.0);
    CHECK(r.y == rkreg::true_f(r.x));
  }
  const auto big = rkreg::simulate_dataset(100000, 3);
  double resid = 0.0, resid2 = 0.0;
  for (const auto& r : big) {
    const double e = r.y - rkreg::true_f(r.x);
    resid += e;
    resid2 += e * e;
  }
  CHECK(std::fabs(resid / 1e5) < 0.01);
  CHECK(resid2 / 1e5 == doctest::Approx(1.0).epsilon(0.02));

  const auto a = rkreg::simulate_dataset(500, 42);
  const auto b = rkreg::simulate_dataset(500, 42);
  const auto c = rkreg::simulate_dataset(500, 43);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].x == b[i].x && a[i].y == b[i].y;
    differ = differ || a[i].x != c[i].x;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("theoretical CLT variances") {
  const Kernel g = Kernel::gaussian();
  const double nw = rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.4, 0.32, g);
  CHECK(nw == doctest::Approx(0.1410474 / 1.96).epsilon(1e-6));
  CHECK(std::fabs(nw - 0.07196) < 1e-5);
  const double tilde = rkreg::theoretical_clt_variance(DerivativeEstimator::tilde, 0.4, 0.32, g);
  CHECK(std::fabs(tilde - 0.07222) < 1e-5);
  CHECK(rkreg::theoretical_clt_variance(DerivativeEstimator::check, 0.4, 0.32, g) == tilde);

  const double r9 = rkreg::theoretical_clt_variance(DerivativeEstimator::tilde, 0.9, 0.32, g) /
                    rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.9, 0.32, g);
  CHECK(std::fabs(r9 - 1.9489) < 0.0003);

  const Kernel e = Kernel::epanechnikov();
  CHECK(rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.4, 0.32, e) /
            rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.4, 0.32, g) ==
        doctest::Approx(1.5 / 0.14104739588693907));
  CHECK(rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.4, 0.32, g, 2.0) ==
        doctest::Approx(4.0 * nw));

  std::mt19937_64 eng(6);
  std::uniform_real_distribution<double> unit;
  for (int i = 0; i < 200; ++i) {
    const double x = unit(eng);
    const double a = 0.21 + 0.12 * unit(eng);
    CHECK(rkreg::theoretical_clt_variance(DerivativeEstimator::nw, x, a, g) <=
          rkreg::theoretical_clt_variance(DerivativeEstimator::tilde, x, a, g));
  }
  CHECK(rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 0.0, 0.3, g) ==
        rkreg::theoretical_clt_variance(DerivativeEstimator::tilde, 0.0, 0.3, g));
  CHECK_THROWS_AS(rkreg::theoretical_clt_variance(DerivativeEstimator::nw, 1.5, 0.3, g),
                  std::domain_error);
}

TEST_CASE("normalization identity") {
  std::mt19937_64 eng(12);
  std::uniform_real_distribution<double> unit;
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<std::uint64_t>(1 + eng() % 1000000);
    const double a = 0.05 + 0.9 * unit(eng);
    const double h = std::pow(static_cast<double>(n), -a);
    const double direct = std::sqrt(static_cast<double>(n) * h * h * h);
    CHECK(rkreg::clt_scale(n, a) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(rkreg::clt_scale(n, a) ==
          doctest::Approx(std::pow(static_cast<double>(n), (1.0 - 3.0 * a) / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("CLT harness is deterministic across thread counts") {
  rkreg::SimConfig cfg;
  cfg.n = 400;
  cfg.replicates = 60;
  cfg.points = {0.3, 0.7};
  cfg.threads = 1;
  const auto one = rkreg::run_clt_experiment(cfg);
  cfg.threads = 4;
  const auto four = rkreg::run_clt_experiment(cfg);
  REQUIRE(one.cells.size() == 6);
  REQUIRE(four.cells.size() == 6);
  for (std::size_t c = 0; c < one.cells.size(); ++c) {
    CHECK(one.cells[c].normalized == four.cells[c].normalized);
    CHECK(one.cells[c].ad_stat == four.cells[c].ad_stat);
  }
  CHECK(&one.cell(DerivativeEstimator::tilde, 0.7) == &one.cells[3]);

  cfg.alpha = 0.4;
  CHECK_FALSE(cfg.alpha_in_clt_range());
  cfg.points = {0.5, 1.5};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.points = {0.5};
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

// Full-size run. Means are compared with the bias predicted by the
// expected-value quadrature.
TEST_CASE("CLT run at the reference settings") {
  rkreg::SimConfig cfg;
  cfg.n = 10000;
  cfg.replicates = 2000;
  cfg.alpha = 0.32;
  cfg.points = {0.4, 0.9};
  const auto res = rkreg::run_clt_experiment(cfg);
  const double scale = rkreg::clt_scale(cfg.n, cfg.alpha);

  const auto& nw4 = res.cell(DerivativeEstimator::nw, 0.4);
  CHECK(nw4.valid);
  CHECK(nw4.guard_failures == 0);
  CHECK(std::fabs(nw4.emp_var / nw4.theo_var - 1.0) < 0.15);

  for (double x : {0.4, 0.9}) {
    const auto m = rkreg::testing::expected_means(ref_f, x, cfg.n, cfg.alpha, 4000);
    const double truth = central_difference(ref_f, x);
    const double nw_bias = scale * (m.nw_derivative() - truth);
    const double tilde_bias = scale * (m.response_slope - truth);
    MESSAGE("x=" << x << " predicted nw " << nw_bias << " observed "
                 << res.cell(DerivativeEstimator::nw, x).emp_mean << "; predicted tilde "
                 << tilde_bias << " observed " << res.cell(DerivativeEstimator::tilde, x).emp_mean);
    CHECK(std::fabs(res.cell(DerivativeEstimator::nw, x).emp_mean - nw_bias) < 0.05);
    CHECK(std::fabs(res.cell(DerivativeEstimator::tilde, x).emp_mean - tilde_bias) < 0.05);
    CHECK(std::fabs(res.cell(DerivativeEstimator::check, x).emp_mean - tilde_bias) < 0.05);
  }
}

TEST_CASE("convergence sweep") {
  const std::vector<std::size_t> smoke{10};
  const std::vector<std::uint64_t> one_seed{1};
  const auto rows = rkreg::run_convergence_sweep(smoke, one_seed, 0.32, Kernel::gaussian());
  CHECK(rows.size() == 3);

  const std::vector<std::size_t> ns{1000, 10000, 100000};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  const auto sweep = rkreg::run_convergence_sweep(ns, seeds, 0.32, Kernel::gaussian());
  REQUIRE(sweep.size() == 9);
  for (auto e : rkreg::kAllDerivativeEstimators) {
    double first = -1, last = -1;
    for (const auto& r : sweep) {
      if (r.estimator != e) continue;
      if (r.n == 1000) first = r.mse;
      if (r.n == 100000) last = r.mse;
    }
    CHECK(last < first);
  }
}

// Without noise the remaining error is the smoothing bias, which the
// expected-value quadrature predicts.
TEST_CASE("noiseless error follows the predicted bias") {
  constexpr std::size_t n = 100000;
  const auto data = rkreg::simulate_dataset(n, 5, 0.0);
  const std::vector<double> grid{0.3, 0.5, 0.85};
  rkreg::EstimatorState s(grid, Kernel::gaussian(), rkreg::BandwidthSchedule(0.32));
  for (const auto& r : data) s.update(r);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = rkreg::testing::expected_means(ref_f, grid[i], n, 0.32, 2000);
    MESSAGE("x=" << grid[i] << " estimate " << s.estimate_f_prime_nw(i) << " predicted "
                 << m.nw_derivative() << " truth " << rkreg::true_f_prime(grid[i]));
    CHECK(std::fabs(s.estimate_f_prime_nw(i) - m.nw_derivative()) < 0.3);
  }
}
