#pragma once

#include "inar/series.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>

namespace inar {

/// Reads a count series from CSV with one column (count) or two (label, count).
///
/// A first row whose count field contains a letter is taken as a header.
/// Blank lines are skipped. Negative, non-integer or missing counts raise
/// ParseError with the 1-based line number.
[[nodiscard]] CountSeries read_counts_csv(std::istream& in);
[[nodiscard]] CountSeries read_counts_csv(const std::filesystem::path& path);

/// Writes "count" or "label,count" rows with a header; read_counts_csv reads it back unchanged.
void write_counts_csv(std::ostream& out, const CountSeries& series);

/// Numeric covariate matrix, one row per time point; an optional non-numeric header row is skipped.
[[nodiscard]] Eigen::MatrixXd read_covariates_csv(const std::filesystem::path& path);

/// Columns [1, sin(2 pi t / period), cos(2 pi t / period)] for t = 1..n, plus t / n with a trend.
///
/// With `lead_in` > 0, that many extra rows for t = 1 - lead_in..0 come first
/// (a simulation burn-in); the trend keeps dividing by n.
[[nodiscard]] Eigen::MatrixXd build_seasonal_covariates(int n, int period, bool include_trend, int lead_in = 0);

}  // namespace inar
