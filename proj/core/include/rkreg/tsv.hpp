#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rkreg/estimator.hpp"
#include "rkreg/normality.hpp"
#include "rkreg/simulation.hpp"

namespace rkreg {

/// 17 significant digits ("%.17g"); round-trips every finite double.
std::string format_double(double v);

/// estimator, x, n, alpha, kernel, emp_mean, emp_var, theo_var, ad_stat,
/// guard_failures
void write_clt_tsv(std::ostream& out, const CltResult& result);

/// bin_left, bin_right, count
void write_histogram_tsv(std::ostream& out, std::span<const HistogramBin> bins);

/// n, estimator, alpha, kernel, mse, max_abs_error, guard_failures
void write_sweep_tsv(std::ostream& out, std::span<const SweepRow> rows,
                     double alpha, const std::string& kernel);

/// Two-column CSV with header "x,y".
void write_xy_csv(std::ostream& out, std::span<const SampleRecord> records);
/// Reads the format above; throws DataError naming the first bad line.
std::vector<SampleRecord> read_xy_csv(std::istream& in);

}  // namespace rkreg
