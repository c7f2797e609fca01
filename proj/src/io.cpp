#include "inar/io.hpp"

#include "inar/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace inar {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

bool has_letter(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

bool is_number(const std::string& s) {
    double v = 0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    return !s.empty() && ec == std::errc() && ptr == end;
}

bool is_header_field(const std::string& s) { return has_letter(s) && !is_number(s); }

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return in;
}

Count parse_count(const std::string& field, std::size_t row) {
    if (field.empty()) throw ParseError("row " + std::to_string(row) + ": missing count", row);
    Count value = 0;
    const char* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("row " + std::to_string(row) + ": '" + field + "' is not an integer count", row);
    }
    if (value < 0) throw ParseError("row " + std::to_string(row) + ": negative count " + field, row);
    return value;
}

}  // namespace

CountSeries read_counts_csv(std::istream& in) {
    std::vector<Count> counts;
    std::vector<std::string> labels;
    std::optional<std::size_t> columns;
    bool first = true;
    std::string line;
    for (std::size_t row = 1; std::getline(in, line); ++row) {
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() > 2) {
            throw ParseError("row " + std::to_string(row) + ": expected at most two columns", row);
        }
        const bool header = first && is_header_field(fields.back());
        first = false;
        if (header) continue;
        if (columns && *columns != fields.size()) {
            throw ParseError("row " + std::to_string(row) + ": inconsistent number of columns", row);
        }
        columns = fields.size();
        counts.push_back(parse_count(fields.back(), row));
        if (fields.size() == 2) labels.push_back(fields.front());
    }
    if (counts.empty()) throw ParseError("no counts found", 0);
    return CountSeries(std::move(counts), std::move(labels));
}

CountSeries read_counts_csv(const std::filesystem::path& path) {
    auto in = open(path);
    return read_counts_csv(in);
}

void write_counts_csv(std::ostream& out, const CountSeries& series) {
    const bool labelled = series.has_labels();
    out << (labelled ? "label,count\n" : "count\n");
    for (int t = 1; t <= series.length(); ++t) {
        if (labelled) {
            const auto& label = series.labels()[static_cast<std::size_t>(t - 1)];
            if (label.find_first_of(",\n\r") != std::string::npos || label != trim(label)) {
                throw ConfigError("label '" + label + "' cannot be written unquoted");
            }
            out << label << ',';
        }
        out << series.at(t) << '\n';
    }
}

Eigen::MatrixXd read_covariates_csv(const std::filesystem::path& path) {
    auto in = open(path);
    std::vector<std::vector<double>> rows;
    bool first = true;
    std::string line;
    for (std::size_t row = 1; std::getline(in, line); ++row) {
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        const bool header = first && std::any_of(fields.begin(), fields.end(), is_header_field);
        first = false;
        if (header) continue;
        std::vector<double> values;
        for (const auto& f : fields) {
            double v = 0;
            std::from_chars(f.data(), f.data() + f.size(), v);
            if (!is_number(f) || !std::isfinite(v)) {
                throw ParseError("row " + std::to_string(row) + ": '" + f + "' is not a number", row);
            }
            values.push_back(v);
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw ParseError("row " + std::to_string(row) + ": inconsistent number of columns", row);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no covariate rows found", 0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return x;
}

Eigen::MatrixXd build_seasonal_covariates(int n, int period, bool include_trend, int lead_in) {
    if (n < 1) throw ConfigError("covariates need n >= 1");
    if (period < 2) throw ConfigError("the seasonal period must be at least 2");
    if (lead_in < 0) throw ConfigError("lead-in rows must be nonnegative");
    Eigen::MatrixXd x(lead_in + n, include_trend ? 4 : 3);
    for (int r = 0; r < lead_in + n; ++r) {
        const int t = r + 1 - lead_in;
        const double angle = 2.0 * std::numbers::pi * t / period;
        x(r, 0) = 1.0;
        x(r, 1) = std::sin(angle);
        x(r, 2) = std::cos(angle);
        if (include_trend) x(r, 3) = static_cast<double>(t) / n;
    }
    return x;
}

}  // namespace inar
