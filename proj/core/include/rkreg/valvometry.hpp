#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rkreg/estimator.hpp"
#include "rkreg/kernel.hpp"

namespace rkreg {

inline constexpr double kSecondsPerDay = 86400.0;

/// One shell-gape reading.
struct GapeRecord {
  double timestamp = 0.0;  ///< seconds (UTC epoch, or seconds since midnight)
  int animal_id = 0;
  double distance_mm = 0.0;
};

enum class TimestampFormat {
  automatic,      ///< numeric seconds if the field parses as a number, else ISO-8601
  epoch_seconds,
  iso8601,
};

struct IngestOptions {
  int min_animal = 1;
  int max_animal = 16;
  /// Added to UTC timestamps before splitting into days.
  std::int64_t tz_offset_seconds = 0;
  TimestampFormat timestamp_format = TimestampFormat::automatic;
};

struct PartitionKey {
  std::int64_t day = 0;
  int animal_id = 0;
  auto operator<=>(const PartitionKey&) const = default;
};

struct IngestResult {
  /// Records per (day, animal) in file order.
  std::map<PartitionKey, std::vector<GapeRecord>> partitions;
  std::size_t rows = 0;       ///< data rows seen (header excluded)
  std::size_t malformed = 0;  ///< rows skipped by validation

  std::size_t record_count() const;
};

/// Parses `timestamp,animal_id,distance_mm` CSV (columns in any order, named
/// by the header). Malformed rows are counted and skipped. Throws DataError
/// on missing columns or when more than half the rows are malformed.
IngestResult ingest_csv(std::istream& in, const IngestOptions& options = {});
IngestResult ingest_csv(const std::filesystem::path& path,
                        const IngestOptions& options = {});

/// Seconds since the epoch for "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]".
std::optional<double> parse_iso8601(std::string_view text);

std::int64_t day_index(double timestamp, std::int64_t tz_offset_seconds) noexcept;
double day_start(std::int64_t day, std::int64_t tz_offset_seconds) noexcept;

/// Writes records back as `timestamp,animal_id,distance_mm` with 17
/// significant digits.
void write_gape_csv(std::ostream& out, std::span<const GapeRecord> records);

enum class VelocityClass { low, mid, high };
const char* to_string(VelocityClass c) noexcept;

/// Per-bin velocity estimates for one animal over one day.
struct DayVelocityGrid {
  std::int64_t day = 0;
  int animal_id = 0;
  std::size_t records = 0;
  std::vector<double> bin_centers;  ///< fraction of the day, (i + 0.5) / m
  std::vector<double> velocity;     ///< mm/s, signed; NaN where missing
  std::vector<std::optional<VelocityClass>> velocity_class;

  bool missing(std::size_t bin) const { return !std::isfinite(velocity.at(bin)); }
};

struct DayEstimateOptions {
  double alpha = 0.32;
  Kernel kernel = Kernel::gaussian();
  std::size_t bins = 288;
  std::int64_t tz_offset_seconds = 0;
};

inline constexpr std::size_t kMinRecordsPerDay = 100;

/// Bin-centre grid over [0, 1] used for a day.
std::vector<double> day_grid(std::size_t bins);

/// Fresh state for a day: grid of bin centres, no design density.
EstimatorState new_day_state(const DayEstimateOptions& options);

/// Streams records (arrival order) into `state` at x = fraction of `day`.
void stream_day(EstimatorState& state, std::span<const GapeRecord> records,
                std::int64_t day, std::int64_t tz_offset_seconds);

/// Velocity grid read off a day state; guarded bins are NaN. Classes unset.
DayVelocityGrid velocity_from_state(const EstimatorState& state,
                                    std::int64_t day, int animal_id);

/// Derivative of the gape signal over one day, in mm/s. Throws DataError for
/// fewer than kMinRecordsPerDay records. Classes are terciles of this day.
DayVelocityGrid estimate_day(std::span<const GapeRecord> records,
                             std::int64_t day, int animal_id,
                             const DayEstimateOptions& options = {});

/// Sets every non-missing bin's class from the tercile of |velocity| across
/// all `grids` jointly (rank-based, so group sizes differ by at most one).
void assign_tercile_classes(std::span<DayVelocityGrid> grids);

struct BatchEstimate {
  std::vector<DayVelocityGrid> grids;  ///< sorted by (day, animal)
  std::vector<std::pair<PartitionKey, std::string>> failures;
};

/// estimate_day over every partition (in parallel), then global terciles.
BatchEstimate estimate_all(const IngestResult& data,
                           const DayEstimateOptions& options,
                           unsigned threads = 0);

/// bin_center_frac, velocity_mm_per_s, class, missing_flag
void write_velocity_tsv(std::ostream& out, const DayVelocityGrid& grid);

struct HeatmapFiles {
  std::filesystem::path velocity;
  std::filesystem::path classes;
};

/// Writes `<prefix>.velocity.tsv` (|velocity|) and `<prefix>.class.tsv`.
/// One row per (animal, calendar day) across the full span of days; days
/// without data become blank rows. Throws std::invalid_argument if `grids`
/// is empty or bin counts differ.
HeatmapFiles export_heatmap(std::span<const DayVelocityGrid> grids,
                            const std::filesystem::path& prefix);

}  // namespace rkreg
