#include "rkreg/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rkreg/estimator.hpp"
#include "rkreg/kernel.hpp"
#include "rkreg/quadrature.hpp"
#include "rkreg/random.hpp"
#include "rkreg/simulation.hpp"

namespace rkreg {
namespace {

template <typename Fn>
CheckResult timed(std::string name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = std::move(name);
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// Design density 0.5 + x on [0, 1], positive and integrating to one.
DensityModel tilted_density() {
  return {[](double x) { return 0.5 + x; }, [](double) { return 1.0; }};
}

}  // namespace

CheckResult check_streaming_batch(std::uint64_t seed, int configs) {
  return timed("streaming/batch equivalence", [&](CheckResult& r) {
    Engine engine(seed);
    std::uniform_int_distribution<std::size_t> n_dist(1, 1000);
    std::uniform_int_distribution<std::size_t> m_dist(1, 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    long double worst = 0;
    std::size_t comparisons = 0;
    for (int c = 0; c < configs; ++c) {
      const Kernel kernel = c % 2 == 0 ? Kernel::gaussian() : Kernel::epanechnikov();
      const double alpha = (c / 2) % 2 == 0 ? 0.21 : 0.32;
      const std::optional<DensityModel> density =
          c % 4 < 2 ? DensityModel::uniform_unit() : tilted_density();

      std::vector<double> grid(m_dist(engine));
      for (auto& x : grid) x = -0.1 + 1.2 * unit(engine);
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

      std::vector<SampleRecord> records(n_dist(engine));
      for (auto& rec : records) {
        rec.x = unit(engine);
        rec.y = true_f(rec.x) + normal(engine);
      }

      EstimatorState state(grid, kernel, BandwidthSchedule(alpha), density);
      for (const auto& rec : records) state.update(rec);

      for (std::size_t i = 0; i < grid.size(); ++i) {
        const AccumulatorValues batch =
            batch_oracle(records, kernel, BandwidthSchedule(alpha), density, grid[i]);
        for (Accumulator a : kAllAccumulators) {
          const long double expected = *batch.get(a);
          const long double got = state.accumulator(a)[i];
          const long double err =
              expected == 0 ? std::abs(got) : std::abs(got - expected) / std::abs(expected);
          worst = std::max(worst, err);
          ++comparisons;
        }
      }
    }
    r.passed = worst <= 1e-12L;
    std::ostringstream msg;
    msg << configs << " configurations, " << comparisons
        << " comparisons, worst relative error " << static_cast<double>(worst);
    r.detail = msg.str();
  });
}

CheckResult check_kernel_constants() {
  return timed("kernel constants", [](CheckResult& r) {
    std::ostringstream msg;
    bool ok = true;
    const auto expect = [&](const std::string& what, double got, double want, double tol) {
      const bool pass = std::abs(got - want) <= tol;
      ok = ok && pass;
      if (!pass) msg << what << " = " << got << " (want " << want << " +- " << tol << "); ";
    };

    const Kernel gauss = Kernel::gaussian();
    const Kernel epan = Kernel::epanechnikov();
    expect("xi2(gaussian)", gauss.xi_squared(), 0.1410474, 1e-6);
    if (epan.xi_squared() != 1.5) {
      ok = false;
      msg << "xi2(epanechnikov) != 1.5; ";
    }

    for (const Kernel* k : {&gauss, &epan}) {
      const double lim = k->integration_limit();
      const auto quad = [lim](auto fn) { return integrate(fn, -lim, lim, 1e-12).value; };
      const std::string tag = "[" + k->name() + "] ";
      expect(tag + "int K", quad([k](double u) { return k->value(u); }), 1.0, 1e-6);
      expect(tag + "int K'", quad([k](double u) { return k->derivative(u); }), 0.0, 1e-6);
      expect(tag + "int u K'", quad([k](double u) { return u * k->derivative(u); }), -1.0, 1e-6);
      expect(tag + "int u^2 K'", quad([k](double u) { return u * u * k->derivative(u); }), 0.0,
             1e-6);
      const double m4 = quad([k](double u) { return std::pow(u, 4) * k->value(u); });
      const double m4d = quad([k](double u) { return std::pow(u, 4) * std::abs(k->derivative(u)); });
      if (!std::isfinite(m4) || !std::isfinite(m4d)) {
        ok = false;
        msg << tag << "fourth moments not finite; ";
      }
      expect(tag + "int (K')^2",
             quad([k](double u) { return k->derivative(u) * k->derivative(u); }),
             k->xi_squared(), 1e-8);
    }
    r.passed = ok;
    r.detail = ok ? "xi2(gaussian)=0.14104739588693907, xi2(epanechnikov)=1.5, moments ok"
                  : msg.str();
  });
}

CheckResult check_ground_truth() {
  return timed("ground-truth constants", [](CheckResult& r) {
    const double f4 = true_f(0.4);
    const double f9 = true_f(0.9);
    r.passed = std::abs(f4 * f4 - 0.0036) <= 2e-4 && std::abs(f9 * f9 - 0.9489) <= 2e-4;
    std::ostringstream msg;
    msg.precision(6);
    msg << "f(0.4)^2=" << f4 * f4 << ", f(0.9)^2=" << f9 * f9;
    r.detail = msg.str();
  });
}

std::vector<CheckResult> run_selftest() {
  return {check_streaming_batch(), check_kernel_constants(), check_ground_truth()};
}

}  // namespace rkreg
