#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rkreg/errors.hpp"
#include "rkreg/valvometry.hpp"

using rkreg::GapeRecord;

namespace {

constexpr std::int64_t kDay = 19875;  // 2024-06-01
constexpr double kStep = 1.6;

std::vector<GapeRecord> synthetic_day(int animal, double (*distance)(double frac),
                                      double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  std::vector<GapeRecord> out;
  const double start = static_cast<double>(kDay) * rkreg::kSecondsPerDay;
  for (int i = 0; i < 54000; ++i) {
    const double t = start + kStep * i;
    const double frac = (t - start) / rkreg::kSecondsPerDay;
    out.push_back({t, animal, std::max(0.0, distance(frac) + noise * z(eng))});
  }
  return out;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("ingest small files") {
  std::istringstream three(
      "timestamp,animal_id,distance_mm\n"
      "1717200000,1,3.5\n1717200001.6,2,4.0\n2024-06-01T00:00:03.2Z,1,3.6\n");
  const auto r = rkreg::ingest_csv(three);
  CHECK(r.rows == 3);
  CHECK(r.record_count() == 3);
  CHECK(r.malformed == 0);
  CHECK(r.partitions.at({kDay, 1}).size() == 2);
  CHECK(r.partitions.at({kDay, 1})[1].timestamp == doctest::Approx(1717200003.2));

  std::istringstream with_nan(
      "animal_id,distance_mm,timestamp\n"
      "1,NaN,1717200000\n1,2.0,1717200001\n3,2.5,1717200002\n");
  const auto n = rkreg::ingest_csv(with_nan);
  CHECK(n.record_count() == 2);
  CHECK(n.malformed == 1);

  std::istringstream missing("timestamp,animal,distance_mm\n1,1,1\n");
  CHECK_THROWS_AS(rkreg::ingest_csv(missing), rkreg::DataError);
  std::istringstream junk("timestamp,animal_id,distance_mm\nx,1,1\n1,99,1\n1,1,1\n");
  CHECK_THROWS_AS(rkreg::ingest_csv(junk), rkreg::DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(rkreg::ingest_csv(empty), rkreg::DataError);
  CHECK_THROWS_AS(rkreg::ingest_csv(std::filesystem::path("/nonexistent/gape.csv")),
                  rkreg::DataError);
}

TEST_CASE("timestamps and day boundaries") {
  CHECK(*rkreg::parse_iso8601("2024-06-01T00:00:00Z") == 1717200000.0);
  CHECK(*rkreg::parse_iso8601("2024-06-01T02:00:00+02:00") == 1717200000.0);
  CHECK(*rkreg::parse_iso8601("2024-06-01 00:00:01.5") == 1717200001.5);
  CHECK_FALSE(rkreg::parse_iso8601("yesterday").has_value());
  CHECK_FALSE(rkreg::parse_iso8601("2024-13-01T00:00:00Z").has_value());

  CHECK(rkreg::day_index(1717200000.0, 0) == kDay);
  CHECK(rkreg::day_index(1717199999.0, 0) == kDay - 1);
  CHECK(rkreg::day_index(1717199999.0, 3600) == kDay);
  CHECK(rkreg::day_start(kDay, 0) == 1717200000.0);
  CHECK(rkreg::day_start(kDay, 3600) == 1717196400.0);

  std::istringstream late("timestamp,animal_id,distance_mm\n1717282000,1,1\n");
  rkreg::IngestOptions opts;
  opts.tz_offset_seconds = 7200;
  CHECK(rkreg::ingest_csv(late, opts).partitions.count({kDay + 1, 1}) == 1);
}

TEST_CASE("full day for sixteen animals") {
  std::stringstream csv;
  std::vector<GapeRecord> all;
  for (int a = 1; a <= 16; ++a) {
    auto d = synthetic_day(a, [](double f) { return 4.0 + std::sin(6.0 * f); });
    all.insert(all.end(), d.begin(), d.end());
  }
  rkreg::write_gape_csv(csv, all);
  const auto r = rkreg::ingest_csv(csv);
  CHECK(r.record_count() == 864000);
  CHECK(r.partitions.size() == 16);
  for (const auto& [key, recs] : r.partitions) {
    CHECK(key.day == kDay);
    CHECK(recs.size() == 54000);
  }
  SUBCASE("round trip is lossless") {
    const auto& back = r.partitions.at({kDay, 7});
    for (std::size_t i = 0; i < back.size(); i += 997) {
      const auto& orig = all[6 * 54000 + i];
      CHECK(back[i].timestamp == orig.timestamp);
      CHECK(back[i].distance_mm == orig.distance_mm);
    }
  }
}

TEST_CASE("velocity of known days") {
  SUBCASE("constant opening") {
    const auto d = synthetic_day(1, [](double) { return 3.0; });
    const auto g = rkreg::estimate_day(d, kDay, 1);
    REQUIRE(g.velocity.size() == 288);
    CHECK(g.bin_centers[0] == doctest::Approx(0.5 / 288));
    for (std::size_t b = 0; b < g.velocity.size(); ++b) {
      REQUIRE_FALSE(g.missing(b));
      CHECK(std::fabs(g.velocity[b]) < 1e-9);
    }
  }
  SUBCASE("linear opening") {
    // 6 mm over the day
    const auto d = synthetic_day(1, [](double f) { return 1.0 + 6.0 * f; }, 0.05);
    const auto g = rkreg::estimate_day(d, kDay, 1);
    const double truth = 6.0 / rkreg::kSecondsPerDay;
    int interior = 0;
    for (std::size_t b = 0; b < g.velocity.size(); ++b) {
      if (g.bin_centers[b] < 0.25 || g.bin_centers[b] > 0.75) continue;
      ++interior;
      CHECK(std::fabs(g.velocity[b] / truth - 1.0) < 0.10);
    }
    CHECK(interior == 144);
  }
  SUBCASE("sinusoidal opening") {
    const auto d = synthetic_day(
        1, [](double f) { return 4.0 + 2.0 * std::sin(4.0 * std::numbers::pi * f); }, 0.1);
    const auto g = rkreg::estimate_day(d, kDay, 1);
    std::vector<double> est, ref;
    for (std::size_t b = 0; b < g.velocity.size(); ++b) {
      const double c = g.bin_centers[b];
      if (c < 0.25 || c > 0.75) continue;
      est.push_back(g.velocity[b]);
      ref.push_back(8.0 * std::numbers::pi * std::cos(4.0 * std::numbers::pi * c) /
                    rkreg::kSecondsPerDay);
    }
    const double n = static_cast<double>(est.size());
    double me = 0, mr = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      me += est[i] / n;
      mr += ref[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      sxy += (est[i] - me) * (ref[i] - mr);
      sxx += (est[i] - me) * (est[i] - me);
      syy += (ref[i] - mr) * (ref[i] - mr);
    }
    const double r = sxy / std::sqrt(sxx * syy);
    MESSAGE("pearson r " << r);
    CHECK(r > 0.95);
  }
  SUBCASE("deterministic") {
    const auto d = synthetic_day(3, [](double f) { return 2.0 + f * f; }, 0.2, 9);
    const auto a = rkreg::estimate_day(d, kDay, 3);
    const auto b = rkreg::estimate_day(d, kDay, 3);
    CHECK(a.velocity == b.velocity);
  }
  SUBCASE("sparse days are refused") {
    std::vector<GapeRecord> few(50, GapeRecord{1717200000.0, 1, 2.0});
    CHECK_THROWS_AS(rkreg::estimate_day(few, kDay, 1), rkreg::DataError);
  }
}

TEST_CASE("terciles and heatmap export") {
  std::vector<rkreg::DayVelocityGrid> grids;
  const auto centres = rkreg::day_grid(4);
  CHECK(centres == std::vector<double>{0.125, 0.375, 0.625, 0.875});
  for (std::int64_t day : {10, 12}) {
    rkreg::DayVelocityGrid g;
    g.day = day;
    g.animal_id = 2;
    g.bin_centers = centres;
    g.velocity = {1e-5 * static_cast<double>(day), -2e-5, std::nan(""), 3e-5};
    grids.push_back(g);
  }
  rkreg::assign_tercile_classes(grids);
  int counts[3] = {0, 0, 0};
  for (const auto& g : grids) {
    CHECK_FALSE(g.velocity_class[2].has_value());
    for (const auto& c : g.velocity_class) {
      if (c) ++counts[static_cast<int>(*c)];
    }
  }
  CHECK(counts[0] == 2);
  CHECK(counts[1] == 2);
  CHECK(counts[2] == 2);
  CHECK(grids[1].velocity_class[0] == rkreg::VelocityClass::high);

  std::ostringstream tsv;
  rkreg::write_velocity_tsv(tsv, grids[0]);
  CHECK(tsv.str().find("0.625\tnan\tNA\t1\n") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "rkreg_heatmap_test";
  std::filesystem::create_directories(dir);
  const auto files = rkreg::export_heatmap(grids, dir / "map");
  const auto vel = lines_of(files.velocity);
  const auto cls = lines_of(files.classes);
  REQUIRE(vel.size() == 4);
  REQUIRE(cls.size() == 4);
  CHECK(vel[0] == "day\tanimal_id\t0.125\t0.375\t0.625\t0.875");
  CHECK(vel[1].rfind("10\t2\t", 0) == 0);
  // day 11 had no data: kept as a blank row
  CHECK(vel[2] == "11\t2\t\t\t\t");
  CHECK(cls[2] == "11\t2\t\t\t\t");
  CHECK(vel[3].rfind("12\t2\t0.00012000000000000002\t2.0000000000000002e-05\t\t", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("terciles over many cells are balanced") {
  std::mt19937_64 eng(4);
  std::normal_distribution<double> z;
  std::vector<rkreg::DayVelocityGrid> grids(7);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    grids[i].day = static_cast<std::int64_t>(i);
    grids[i].bin_centers = rkreg::day_grid(288);
    for (int b = 0; b < 288; ++b) grids[i].velocity.push_back(b % 50 == 0 ? std::nan("") : z(eng));
  }
  rkreg::assign_tercile_classes(grids);
  int counts[3] = {0, 0, 0};
  int total = 0;
  for (const auto& g : grids) {
    for (const auto& c : g.velocity_class) {
      if (c) {
        ++counts[static_cast<int>(*c)];
        ++total;
      }
    }
  }
  for (int c : counts) CHECK(std::abs(3 * c - total) <= 3);
}

TEST_CASE("batch estimation reports thin partitions") {
  rkreg::IngestResult data;
  data.partitions[{kDay, 1}] = synthetic_day(1, [](double f) { return 2.0 + f; });
  data.partitions[{kDay, 2}] = std::vector<GapeRecord>(20, GapeRecord{1717200000.0, 2, 1.0});
  const auto batch = rkreg::estimate_all(data, {}, 2);
  CHECK(batch.grids.size() == 1);
  REQUIRE(batch.failures.size() == 1);
  CHECK(batch.failures[0].first.animal_id == 2);
}
