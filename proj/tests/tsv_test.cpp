#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rkreg/errors.hpp"
#include "rkreg/tsv.hpp"

TEST_CASE("doubles round trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(rkreg::format_double(v)) == v);
  }
}

TEST_CASE("xy csv") {
  const std::vector<rkreg::SampleRecord> recs{{0.25, -1.0 / 3.0}, {0.75, 1e-12}};
  std::stringstream buf;
  rkreg::write_xy_csv(buf, recs);
  CHECK(buf.str().rfind("x,y\n", 0) == 0);
  const auto back = rkreg::read_xy_csv(buf);
  REQUIRE(back.size() == 2);
  CHECK(back[0].y == recs[0].y);
  CHECK(back[1].y == recs[1].y);

  std::istringstream bad("x,y\n0.1,0.2\n0.3,oops\n");
  try {
    rkreg::read_xy_csv(bad);
    FAIL("expected DataError");
  } catch (const rkreg::DataError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  std::istringstream headless("0.1,0.2\n");
  CHECK_THROWS_AS(rkreg::read_xy_csv(headless), rkreg::DataError);
}

TEST_CASE("CLT table layout") {
  rkreg::SimConfig cfg;
  cfg.n = 200;
  cfg.replicates = 20;
  cfg.points = {0.4, 0.9};
  const auto res = rkreg::run_clt_experiment(cfg);
  std::stringstream out;
  rkreg::write_clt_tsv(out, res);
  std::string line;
  std::getline(out, line);
  CHECK(line ==
        "estimator\tx\tn\talpha\tkernel\temp_mean\temp_var\ttheo_var\tad_stat\tguard_failures");
  int rows = 0;
  while (std::getline(out, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == 9);
  }
  CHECK(rows == 6);
}
