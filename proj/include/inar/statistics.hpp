#pragma once

#include "inar/cls.hpp"
#include "inar/cml.hpp"
#include "inar/score.hpp"

#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace inar {

enum class TestMethod { kF, kScore };

[[nodiscard]] std::string_view to_string(TestMethod method) noexcept;
/// Accepts "f" or "score" (any case); ConfigError otherwise.
[[nodiscard]] TestMethod parse_method(std::string_view text);

/// P(X > x) for X ~ chi-square(1).
[[nodiscard]] double chi2_upper_tail(double x);
/// q with P(X <= q) = prob for X ~ chi-square(1).
[[nodiscard]] double chi2_quantile(double prob);

/// statistic > the (1 - level) chi-square(1) quantile; a statistic at the quantile is not significant.
[[nodiscard]] bool is_significant(double statistic, double level);

/// The five intervention types scanned by default.
[[nodiscard]] std::vector<double> default_delta_grid();

struct TestOutcome {
    TestMethod method = TestMethod::kF;
    int tau = 0;
    double delta = 0;
    double statistic = 0;
    double p_value = 1;        ///< asymptotic chi-square(1) unless stated otherwise
    bool significant = false;
    double kappa_hat = 0;
    bool available = true;     ///< false when the cell is rank deficient or its information singular
};

struct CellValue {
    double statistic = 0;
    double kappa_hat = 0;
};

/// Either test statistic, evaluated cell by cell against one null fit.
class StatisticScanner {
public:
    /// The F path needs a constant mean; the score path needs order 1.
    StatisticScanner(const CountSeries& series, const ConditionalModel& null_model, TestMethod method,
                     const CmlOptions& cml_options = {});

    [[nodiscard]] TestMethod method() const noexcept { return method_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int length() const noexcept { return n_; }
    [[nodiscard]] const FStatisticScanner* f() const noexcept { return f_ ? &*f_ : nullptr; }
    [[nodiscard]] const ScoreScanner* score() const noexcept { return score_ ? &*score_ : nullptr; }

    /// Empty for rank-deficient or singular cells; DomainError for tau out of range.
    [[nodiscard]] std::optional<CellValue> evaluate(const InterventionProfile& profile) const;

private:
    TestMethod method_;
    int order_;
    int n_;
    std::optional<FStatisticScanner> f_;
    std::optional<ScoreScanner> score_;
};

/// Known (tau, delta) test at the chi-square(1) reference: significant iff the
/// statistic exceeds the (1 - level) quantile.
[[nodiscard]] TestOutcome test_at(const StatisticScanner& scanner, const InterventionProfile& profile, double level);
[[nodiscard]] TestOutcome test_at(const CountSeries& series, const ConditionalModel& null_model,
                                  const InterventionProfile& profile, TestMethod method, double level);

struct TauRange {
    int first = 0;
    int last = 0;
};

/// [p + 1 + margin, n - margin].
[[nodiscard]] TauRange default_tau_range(int n, int order, int margin = 0);

struct DeltaMax {
    double delta = 0;
    int tau = 0;            ///< earliest maximizing tau
    double statistic = 0;
    double kappa_hat = 0;
    bool available = false; ///< false when every cell for this delta was unavailable
};

struct MaxResult {
    TestOutcome best;
    std::vector<DeltaMax> per_delta;   ///< in grid order
    TauRange tau_range;
    std::vector<InterventionProfile> unavailable;   ///< skipped cells in (delta, tau) order
};

/// Exhaustive scan over tau_range x delta_grid.
///
/// best is the overall maximum, ties toward the larger delta and then the
/// earlier tau. best.p_value is the pointwise chi-square(1) tail. With a
/// critical value, best.significant means statistic > critical_value;
/// otherwise the pointwise (1 - level) quantile is used.
[[nodiscard]] MaxResult max_statistic(const StatisticScanner& scanner, const std::vector<double>& delta_grid,
                                      TauRange tau_range, double level,
                                      std::optional<double> critical_value = std::nullopt, int threads = 1);

/// Tabulated critical values of the maximum statistic for n in {100, 200}
/// and level in {0.10, 0.05, 0.01}. UnsupportedError otherwise.
[[nodiscard]] double approximate_critical_value(int n, TestMethod method, double level);

/// The delta with the largest statistic if it exceeds the threshold, ties toward larger delta.
[[nodiscard]] std::optional<double> classify_by_max(const std::map<double, double>& per_delta, double threshold);

}  // namespace inar
