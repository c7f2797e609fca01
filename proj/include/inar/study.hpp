#pragma once

#include "inar/statistics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inar {

enum class StudyKind { kSize, kPower, kClassification, kCriticalValues };

[[nodiscard]] std::string_view to_string(StudyKind kind) noexcept;
[[nodiscard]] StudyKind parse_study_kind(std::string_view text);

struct ModelSetting {
    std::vector<double> alphas;
    double lambda = 1;
};

struct StudySpec {
    StudyKind kind = StudyKind::kSize;
    std::vector<TestMethod> methods{TestMethod::kF, TestMethod::kScore};
    std::vector<ModelSetting> models;
    int n = 200;
    std::vector<double> tau_fractions{0.25, 0.5, 0.75};   ///< tau = round(fraction * n)
    std::vector<double> tested_deltas{0.0, 0.8, 1.0};
    /// Power and classification; an empty entry means a clean series.
    std::vector<std::optional<double>> true_deltas;
    std::vector<double> levels{0.01, 0.05, 0.10};
    std::vector<double> quantiles{0.90, 0.95, 0.99};     ///< critical-value studies
    int replicates = 2000;
    std::uint64_t seed = 0;
    int threads = 1;
    CmlOptions cml;
};

/// kappa = {3, 2.5, 2, 1.5, 1} sqrt(lambda) for delta = {0, 0.6, 0.8, 0.9, 1}.
/// Other deltas are ConfigError.
[[nodiscard]] double scaled_kappa(double delta, double lambda);

/// Named designs: "inar1" (INAR(1), F and score) and "inar2" (INAR(2), F).
[[nodiscard]] StudySpec study_preset(std::string_view name, StudyKind kind);

struct StudyRow {
    StudyKind kind = StudyKind::kSize;
    TestMethod method = TestMethod::kF;
    ModelSetting model;
    int n = 0;
    std::optional<double> delta_true;    ///< empty: clean series
    std::optional<double> delta_tested;  ///< empty: the "none" class, or the maximum over all deltas
    std::optional<int> tau;              ///< empty for critical-value rows
    double level = 0;                    ///< nominal level, or the quantile probability
    double rate_pct = 0;
    double mc_se_pct = 0;
    std::optional<double> quantile;      ///< critical-value rows only
    int replicates = 0;                  ///< replicates with an available statistic
};

struct StudyTable {
    std::vector<StudyRow> rows;
    int failed_replicates = 0;           ///< null fits that failed; their cells count as unavailable
};

/// Runs the Monte Carlo design. Replicate r of model m and scenario s uses
/// substream (m, s, r) of the seed, shared by every method so the methods see
/// the same series. Results do not depend on the thread count.
[[nodiscard]] StudyTable run_study(const StudySpec& spec);

/// Linear interpolation between order statistics (sample quantile type 7).
[[nodiscard]] double empirical_quantile(std::vector<double> values, double prob);

/// Header plus one line per row.
void write_study_csv(std::ostream& out, const StudyTable& table);

}  // namespace inar
