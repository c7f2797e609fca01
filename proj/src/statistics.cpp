#include "inar/statistics.hpp"

#include "inar/errors.hpp"
#include "inar/parallel.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace inar {

std::string_view to_string(TestMethod method) noexcept {
    return method == TestMethod::kF ? "f" : "score";
}

TestMethod parse_method(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "f") return TestMethod::kF;
    if (lower == "score") return TestMethod::kScore;
    throw ConfigError("unknown test method '" + std::string(text) + "' (expected f or score)");
}

double chi2_upper_tail(double x) {
    if (std::isnan(x)) throw DomainError("chi-square tail of NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), x));
}

double chi2_quantile(double prob) {
    if (!(prob >= 0.0 && prob < 1.0)) throw DomainError("chi-square quantile needs prob in [0, 1)");
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(1.0), prob);
}

namespace {

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
}

}  // namespace

bool is_significant(double statistic, double level) {
    check_level(level);
    return statistic > chi2_quantile(1.0 - level);
}

std::vector<double> default_delta_grid() {
    return {0.0, 0.6, 0.8, 0.9, 1.0};
}

StatisticScanner::StatisticScanner(const CountSeries& series, const ConditionalModel& null_model, TestMethod method,
                                   const CmlOptions& cml_options)
    : method_(method), order_(null_model.order), n_(series.length()) {
    if (!null_model.profiles.empty()) throw ConfigError("the null model must not contain interventions");
    if (method == TestMethod::kF) {
        if (!null_model.constant_mean()) {
            throw UnsupportedError("the F test needs a constant innovation mean; use the score test for covariates");
        }
        f_.emplace(series, null_model.order);
    } else {
        score_.emplace(series, null_model, cml_options);
    }
}

std::optional<CellValue> StatisticScanner::evaluate(const InterventionProfile& profile) const {
    try {
        if (f_) {
            const FCell cell = f_->evaluate(profile);
            return CellValue{cell.statistic, cell.kappa_hat};
        }
        const ScoreCell cell = score_->evaluate(profile);
        return CellValue{cell.statistic, cell.kappa_hat};
    } catch (const RankError&) {
        return std::nullopt;
    } catch (const SingularityError&) {
        return std::nullopt;
    }
}

TestOutcome test_at(const StatisticScanner& scanner, const InterventionProfile& profile, double level) {
    check_level(level);
    TestOutcome out;
    out.method = scanner.method();
    out.tau = profile.tau;
    out.delta = profile.delta;
    const auto cell = scanner.evaluate(profile);
    if (!cell) {
        out.available = false;
        return out;
    }
    out.statistic = cell->statistic;
    out.kappa_hat = cell->kappa_hat;
    out.p_value = chi2_upper_tail(cell->statistic);
    out.significant = is_significant(cell->statistic, level);
    return out;
}

TestOutcome test_at(const CountSeries& series, const ConditionalModel& null_model, const InterventionProfile& profile,
                    TestMethod method, double level) {
    return test_at(StatisticScanner(series, null_model, method), profile, level);
}

TauRange default_tau_range(int n, int order, int margin) {
    if (margin < 0) throw ConfigError("edge margin must be nonnegative");
    const TauRange range{order + 1 + margin, n - margin};
    if (range.first > range.last) throw ConfigError("the candidate tau range is empty");
    return range;
}

MaxResult max_statistic(const StatisticScanner& scanner, const std::vector<double>& delta_grid, TauRange tau_range,
                        double level, std::optional<double> critical_value, int threads) {
    check_level(level);
    if (delta_grid.empty()) throw ConfigError("the delta grid is empty");
    for (double d : delta_grid) validate_profile({scanner.order() + 1, d});
    if (tau_range.first < scanner.order() + 1 || tau_range.last > scanner.length() ||
        tau_range.first > tau_range.last) {
        throw ConfigError("tau range [" + std::to_string(tau_range.first) + ", " + std::to_string(tau_range.last) +
                          "] is empty or outside [" + std::to_string(scanner.order() + 1) + ", " +
                          std::to_string(scanner.length()) + "]");
    }

    const auto taus = static_cast<std::size_t>(tau_range.last - tau_range.first + 1);
    std::vector<std::optional<CellValue>> cells(taus * delta_grid.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        const InterventionProfile profile{tau_range.first + static_cast<int>(i % taus), delta_grid[i / taus]};
        cells[i] = scanner.evaluate(profile);
    });

    MaxResult result;
    result.tau_range = tau_range;
    for (std::size_t k = 0; k < delta_grid.size(); ++k) {
        DeltaMax dm;
        dm.delta = delta_grid[k];
        for (std::size_t i = 0; i < taus; ++i) {
            const int tau = tau_range.first + static_cast<int>(i);
            const auto& cell = cells[k * taus + i];
            if (!cell) {
                result.unavailable.push_back({tau, dm.delta});
                continue;
            }
            if (!dm.available || cell->statistic > dm.statistic) {
                dm = {dm.delta, tau, cell->statistic, cell->kappa_hat, true};
            }
        }
        result.per_delta.push_back(dm);
    }

    TestOutcome& best = result.best;
    best.method = scanner.method();
    best.available = false;
    for (const auto& dm : result.per_delta) {
        if (!dm.available) continue;
        const bool better = !best.available || dm.statistic > best.statistic ||
                            (dm.statistic == best.statistic && dm.delta > best.delta);
        if (better) {
            best.available = true;
            best.tau = dm.tau;
            best.delta = dm.delta;
            best.statistic = dm.statistic;
            best.kappa_hat = dm.kappa_hat;
        }
    }
    if (best.available) {
        best.p_value = chi2_upper_tail(best.statistic);
        best.significant = best.statistic > critical_value.value_or(chi2_quantile(1.0 - level));
    }
    return result;
}

double approximate_critical_value(int n, TestMethod method, double level) {
    int column = -1;
    if (std::abs(level - 0.10) < 1e-12) column = 0;
    if (std::abs(level - 0.05) < 1e-12) column = 1;
    if (std::abs(level - 0.01) < 1e-12) column = 2;
    if ((n != 100 && n != 200) || column < 0) {
        throw UnsupportedError("no tabulated critical value for n = " + std::to_string(n) + " at level " +
                               std::to_string(level) + "; use the bootstrap");
    }
    static constexpr double kF[2][3] = {{17, 20, 27}, {19, 22, 28}};
    static constexpr double kScore[2][3] = {{22, 26, 35}, {26, 30, 40}};
    const int row = n == 100 ? 0 : 1;
    return method == TestMethod::kF ? kF[row][column] : kScore[row][column];
}

std::optional<double> classify_by_max(const std::map<double, double>& per_delta, double threshold) {
    if (per_delta.empty()) throw ConfigError("no statistics to classify");
    auto best = per_delta.begin();
    for (auto it = per_delta.begin(); it != per_delta.end(); ++it) {
        if (it->second >= best->second) best = it;   // ascending keys: >= prefers the larger delta
    }
    if (!(best->second > threshold)) return std::nullopt;
    return best->first;
}

}  // namespace inar
