#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "rkreg/normality.hpp"

namespace {

// Textbook A^2 with the parameters fully specified.
double reference_ad(std::vector<double> x, double mean, double var) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto cdf = [&](double v) {
      return 0.5 * std::erfc(-(v - mean) / std::sqrt(2.0 * var));
    };
    const double a = cdf(x[i]);
    const double b = cdf(x[x.size() - 1 - i]);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(a) + std::log1p(-b));
  }
  return -n - s / n;
}

}  // namespace

TEST_CASE("normal cdf") {
  CHECK(rkreg::normal_cdf(0.0) == 0.5);
  CHECK(rkreg::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(rkreg::normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
}

TEST_CASE("anderson-darling statistic") {
  std::mt19937_64 eng(31);
  std::normal_distribution<double> z;
  std::vector<double> sample(500);
  for (auto& v : sample) v = 0.3 * z(eng);
  const double a2 = rkreg::anderson_darling(sample, 0.0, 0.09);
  CHECK(a2 == doctest::Approx(reference_ad(sample, 0.0, 0.09)).epsilon(1e-10));
  CHECK(a2 < rkreg::kAndersonDarlingCritical1pct);

  CHECK(rkreg::anderson_darling(sample, 0.1, 0.09) > rkreg::kAndersonDarlingCritical1pct);
  CHECK(rkreg::anderson_darling(sample, 0.0, 0.36) > rkreg::kAndersonDarlingCritical1pct);

  SUBCASE("rejection rate under the null is near 1%") {
    int rejected = 0;
    for (int rep = 0; rep < 2000; ++rep) {
      std::vector<double> s(200);
      for (auto& v : s) v = z(eng);
      if (rkreg::anderson_darling(s, 0.0, 1.0) > rkreg::kAndersonDarlingCritical1pct) ++rejected;
    }
    // binomial(2000, 0.01): mean 20, sd 4.5
    CHECK(rejected >= 5);
    CHECK(rejected <= 38);
  }
  SUBCASE("NaN entries are ignored") {
    std::vector<double> with_nan(sample);
    with_nan.push_back(std::numeric_limits<double>::quiet_NaN());
    CHECK(rkreg::anderson_darling(with_nan, 0.0, 0.09) == a2);
  }
}

TEST_CASE("histogram and moments") {
  const std::vector<double> v{0.0, 1.0, 1.5, 2.0, 4.0, std::nan("")};
  const auto bins = rkreg::histogram(v, 4);
  REQUIRE(bins.size() == 4);
  CHECK(bins.front().left == 0.0);
  CHECK(bins.back().right == 4.0);
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  CHECK(total == 5);
  CHECK(bins[0].count == 1);
  CHECK(bins[1].count == 2);
  CHECK(bins[3].count == 1);

  const auto m = rkreg::moments(v);
  CHECK(m.count == 5);
  CHECK(m.mean == doctest::Approx(1.7));
  // sum of squared deviations 8.8 over 4
  CHECK(m.variance == doctest::Approx(2.2));
}
