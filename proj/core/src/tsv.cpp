#include "rkreg/tsv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "rkreg/errors.hpp"

namespace rkreg {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_clt_tsv(std::ostream& out, const CltResult& result) {
  const auto& cfg = result.config;
  out << "estimator\tx\tn\talpha\tkernel\temp_mean\temp_var\ttheo_var\tad_stat\tguard_failures\n";
  for (const auto& c : result.cells) {
    out << to_string(c.estimator) << '\t' << format_double(c.x) << '\t' << cfg.n
        << '\t' << format_double(cfg.alpha) << '\t' << cfg.kernel.name() << '\t'
        << format_double(c.emp_mean) << '\t' << format_double(c.emp_var) << '\t'
        << format_double(c.theo_var) << '\t' << format_double(c.ad_stat) << '\t'
        << c.guard_failures << '\n';
  }
}

void write_histogram_tsv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_left\tbin_right\tcount\n";
  for (const auto& b : bins) {
    out << format_double(b.left) << '\t' << format_double(b.right) << '\t'
        << b.count << '\n';
  }
}

void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows,
                     double alpha, const std::string& kernel) {
  out << "n\testimator\talpha\tkernel\tmse\tmax_abs_error\tguard_failures\n";
  for (const auto& r : rows) {
    out << r.n << '\t' << to_string(r.estimator) << '\t' << format_double(alpha)
        << '\t' << kernel << '\t' << format_double(r.mse) << '\t'
        << format_double(r.max_abs_error) << '\t' << r.guard_failures << '\n';
  }
}

void write_xy_csv(std::ostream& out, std::span<const SampleRecord> records) {
  out << "x,y\n";
  for (const auto& r : records) {
    out << format_double(r.x) << ',' << format_double(r.y) << '\n';
  }
}

namespace {

bool parse_field(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::vector<SampleRecord> read_xy_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw DataError("expected header 'x,y', got '" + line + "'");
  std::vector<SampleRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    SampleRecord r;
    if (comma == std::string::npos ||
        !parse_field(std::string_view(line).substr(0, comma), r.x) ||
        !parse_field(std::string_view(line).substr(comma + 1), r.y) ||
        !std::isfinite(r.x) || !std::isfinite(r.y)) {
      throw DataError("malformed record on line " + std::to_string(line_no));
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace rkreg
