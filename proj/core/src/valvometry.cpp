#include "rkreg/valvometry.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rkreg/errors.hpp"
#include "rkreg/parallel.hpp"
#include "rkreg/tsv.hpp"

namespace rkreg {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Splits on commas into `fields` (views into `line`).
void split(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool parse_timestamp(std::string_view field, TimestampFormat format, double& out) {
  switch (format) {
    case TimestampFormat::epoch_seconds:
      return parse_number(field, out);
    case TimestampFormat::iso8601:
      if (auto t = parse_iso8601(trim(field))) {
        out = *t;
        return true;
      }
      return false;
    case TimestampFormat::automatic:
      if (parse_number(field, out)) return true;
      if (auto t = parse_iso8601(trim(field))) {
        out = *t;
        return true;
      }
      return false;
  }
  return false;
}

template <typename T>
bool fixed_digits(std::string_view s, std::size_t pos, std::size_t len, T& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return parse_number(s.substr(pos, len), out);
}

}  // namespace

std::size_t IngestResult::record_count() const {
  std::size_t total = 0;
  for (const auto& [key, records] : partitions) total += records.size();
  return total;
}

std::optional<double> parse_iso8601(std::string_view s) {
  int year, month, day, hour, minute;
  if (!fixed_digits(s, 0, 4, year) || s.size() < 19 || s[4] != '-' ||
      !fixed_digits(s, 5, 2, month) || s[7] != '-' || !fixed_digits(s, 8, 2, day) ||
      (s[10] != 'T' && s[10] != ' ') || !fixed_digits(s, 11, 2, hour) ||
      s[13] != ':' || !fixed_digits(s, 14, 2, minute) || s[16] != ':') {
    return std::nullopt;
  }
  std::size_t pos = 17;
  std::size_t end = pos;
  while (end < s.size() && ((s[end] >= '0' && s[end] <= '9') || s[end] == '.')) ++end;
  double second;
  if (end - pos < 2 || !parse_number(s.substr(pos, end - pos), second)) return std::nullopt;
  pos = end;

  double offset = 0.0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      // UTC
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh, om;
      if (!fixed_digits(s, pos + 1, 2, oh) || !fixed_digits(s, pos + 4, 2, om)) {
        return std::nullopt;
      }
      offset = (s[pos] == '+' ? 1.0 : -1.0) * (oh * 3600.0 + om * 60.0);
    } else {
      return std::nullopt;
    }
  }

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second < 0.0 || second >= 61.0) {
    return std::nullopt;
  }
  const auto days_since_epoch = sys_days(ymd).time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * kSecondsPerDay + hour * 3600.0 +
         minute * 60.0 + second - offset;
}

std::int64_t day_index(double timestamp, std::int64_t tz_offset_seconds) noexcept {
  return static_cast<std::int64_t>(
      std::floor((timestamp + static_cast<double>(tz_offset_seconds)) / kSecondsPerDay));
}

double day_start(std::int64_t day, std::int64_t tz_offset_seconds) noexcept {
  return static_cast<double>(day) * kSecondsPerDay - static_cast<double>(tz_offset_seconds);
}

IngestResult ingest_csv(std::istream& in, const IngestOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: header row required");

  std::vector<std::string_view> fields;
  split(line, fields);
  std::optional<std::size_t> ts_col, animal_col, dist_col;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto name = trim(fields[i]);
    if (name == "timestamp") ts_col = i;
    else if (name == "animal_id") animal_col = i;
    else if (name == "distance_mm") dist_col = i;
  }
  if (!ts_col || !animal_col || !dist_col) {
    throw DataError("header must name columns timestamp, animal_id and distance_mm");
  }
  const std::size_t needed = std::max({*ts_col, *animal_col, *dist_col}) + 1;

  IngestResult result;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.rows;
    split(line, fields);
    GapeRecord rec;
    if (fields.size() < needed ||
        !parse_timestamp(fields[*ts_col], options.timestamp_format, rec.timestamp) ||
        !std::isfinite(rec.timestamp) ||
        !parse_number(fields[*animal_col], rec.animal_id) ||
        rec.animal_id < options.min_animal || rec.animal_id > options.max_animal ||
        !parse_number(fields[*dist_col], rec.distance_mm) ||
        !std::isfinite(rec.distance_mm) || rec.distance_mm < 0.0) {
      ++result.malformed;
      continue;
    }
    const PartitionKey key{day_index(rec.timestamp, options.tz_offset_seconds),
                           rec.animal_id};
    result.partitions[key].push_back(rec);
  }
  if (result.rows > 0 && 2 * result.malformed > result.rows) {
    throw DataError(std::to_string(result.malformed) + " of " +
                    std::to_string(result.rows) +
                    " rows are malformed; refusing the file");
  }
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_csv(in, options);
}

void write_gape_csv(std::ostream& out, std::span<const GapeRecord> records) {
  out << "timestamp,animal_id,distance_mm\n";
  for (const auto& r : records) {
    out << format_double(r.timestamp) << ',' << r.animal_id << ','
        << format_double(r.distance_mm) << '\n';
  }
}

const char* to_string(VelocityClass c) noexcept {
  switch (c) {
    case VelocityClass::low: return "low";
    case VelocityClass::mid: return "mid";
    case VelocityClass::high: return "high";
  }
  return "?";
}

std::vector<double> day_grid(std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("need at least one time bin");
  std::vector<double> grid(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(bins);
  }
  return grid;
}

EstimatorState new_day_state(const DayEstimateOptions& options) {
  return EstimatorState(day_grid(options.bins), options.kernel,
                        BandwidthSchedule(options.alpha));
}

void stream_day(EstimatorState& state, std::span<const GapeRecord> records,
                std::int64_t day, std::int64_t tz_offset_seconds) {
  const double start = day_start(day, tz_offset_seconds);
  for (const auto& r : records) {
    state.update({(r.timestamp - start) / kSecondsPerDay, r.distance_mm});
  }
}

DayVelocityGrid velocity_from_state(const EstimatorState& state, std::int64_t day,
                                    int animal_id) {
  DayVelocityGrid out;
  out.day = day;
  out.animal_id = animal_id;
  out.records = state.count();
  out.bin_centers.assign(state.grid().begin(), state.grid().end());
  out.velocity.resize(state.size());
  out.velocity_class.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    try {
      // mm per day-fraction -> mm per second
      out.velocity[i] = state.estimate_f_prime_nw(i) / kSecondsPerDay;
    } catch (const UnsupportedPoint&) {
      out.velocity[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

DayVelocityGrid estimate_day(std::span<const GapeRecord> records, std::int64_t day,
                             int animal_id, const DayEstimateOptions& options) {
  if (records.size() < kMinRecordsPerDay) {
    throw DataError("day " + std::to_string(day) + ", animal " +
                    std::to_string(animal_id) + ": only " +
                    std::to_string(records.size()) + " records (need " +
                    std::to_string(kMinRecordsPerDay) + ")");
  }
  EstimatorState state = new_day_state(options);
  stream_day(state, records, day, options.tz_offset_seconds);
  DayVelocityGrid grid = velocity_from_state(state, day, animal_id);
  assign_tercile_classes(std::span<DayVelocityGrid>(&grid, 1));
  return grid;
}

void assign_tercile_classes(std::span<DayVelocityGrid> grids) {
  struct Cell {
    double magnitude;
    std::size_t grid;
    std::size_t bin;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    auto& grid = grids[g];
    grid.velocity_class.assign(grid.velocity.size(), std::nullopt);
    for (std::size_t b = 0; b < grid.velocity.size(); ++b) {
      if (!grid.missing(b)) cells.push_back({std::abs(grid.velocity[b]), g, b});
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.magnitude < b.magnitude; });
  const std::size_t total = cells.size();
  for (std::size_t r = 0; r < total; ++r) {
    const std::size_t tercile = 3 * r / total;
    grids[cells[r].grid].velocity_class[cells[r].bin] = static_cast<VelocityClass>(tercile);
  }
}

BatchEstimate estimate_all(const IngestResult& data, const DayEstimateOptions& options,
                           unsigned threads) {
  std::vector<const std::pair<const PartitionKey, std::vector<GapeRecord>>*> parts;
  for (const auto& entry : data.partitions) parts.push_back(&entry);

  std::vector<std::optional<DayVelocityGrid>> grids(parts.size());
  std::vector<std::string> errors(parts.size());
  parallel_for(parts.size(), threads, [&](std::size_t i) {
    const auto& [key, records] = *parts[i];
    try {
      grids[i] = estimate_day(records, key.day, key.animal_id, options);
    } catch (const DataError& e) {
      errors[i] = e.what();
    }
  });

  BatchEstimate out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (grids[i]) {
      out.grids.push_back(std::move(*grids[i]));
    } else {
      out.failures.emplace_back(parts[i]->first, errors[i]);
    }
  }
  assign_tercile_classes(out.grids);
  return out;
}

void write_velocity_tsv(std::ostream& out, const DayVelocityGrid& grid) {
  out << "bin_center_frac\tvelocity_mm_per_s\tclass\tmissing_flag\n";
  for (std::size_t b = 0; b < grid.velocity.size(); ++b) {
    const bool missing = grid.missing(b);
    out << format_double(grid.bin_centers[b]) << '\t'
        << (missing ? std::string("nan") : format_double(grid.velocity[b])) << '\t'
        << (grid.velocity_class[b] ? to_string(*grid.velocity_class[b]) : "NA") << '\t'
        << (missing ? 1 : 0) << '\n';
  }
}

HeatmapFiles export_heatmap(std::span<const DayVelocityGrid> grids,
                            const std::filesystem::path& prefix) {
  if (grids.empty()) throw std::invalid_argument("heatmap needs at least one day grid");
  const std::size_t bins = grids.front().velocity.size();
  std::int64_t first_day = grids.front().day;
  std::int64_t last_day = first_day;
  std::map<int, std::map<std::int64_t, const DayVelocityGrid*>> by_animal;
  for (const auto& g : grids) {
    if (g.velocity.size() != bins) {
      throw std::invalid_argument("heatmap grids disagree on bin count");
    }
    first_day = std::min(first_day, g.day);
    last_day = std::max(last_day, g.day);
    by_animal[g.animal_id][g.day] = &g;
  }

  HeatmapFiles files{prefix, prefix};
  files.velocity += ".velocity.tsv";
  files.classes += ".class.tsv";
  std::ofstream vel(files.velocity);
  std::ofstream cls(files.classes);
  if (!vel || !cls) throw DataError("cannot write heatmap files at " + prefix.string());

  for (std::ostream* out : {static_cast<std::ostream*>(&vel), static_cast<std::ostream*>(&cls)}) {
    *out << "day\tanimal_id";
    for (double c : grids.front().bin_centers) *out << '\t' << format_double(c);
    *out << '\n';
  }
  for (const auto& [animal, days] : by_animal) {
    for (std::int64_t day = first_day; day <= last_day; ++day) {
      vel << day << '\t' << animal;
      cls << day << '\t' << animal;
      const auto it = days.find(day);
      for (std::size_t b = 0; b < bins; ++b) {
        vel << '\t';
        cls << '\t';
        if (it == days.end() || it->second->missing(b)) continue;
        vel << format_double(std::abs(it->second->velocity[b]));
        if (const auto& c = it->second->velocity_class[b]) cls << to_string(*c);
      }
      vel << '\n';
      cls << '\n';
    }
  }
  return files;
}

}  // namespace rkreg
