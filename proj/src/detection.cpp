#include "inar/detection.hpp"

#include "inar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace inar {

double conditional_effect_mean(Count y, double lag_mean, double iv_mean) {
    if (!(lag_mean > 0.0)) throw DomainError("lag mean must be positive");
    if (!(iv_mean >= 0.0)) throw DomainError("intervention mean must be nonnegative");
    if (iv_mean == 0.0 || y == 0) return 0.0;
    return static_cast<double>(y) * (iv_mean / (lag_mean + iv_mean));
}

CountSeries correct_series(const CountSeries& series, std::span<const double> alphas, std::span<const double> lambdas,
                           const Intervention& iv) {
    const int n = series.length();
    const int p = static_cast<int>(alphas.size());
    validate_profile(iv.profile());
    if (iv.tau < p + 1 || iv.tau > n) {
        throw DomainError("tau = " + std::to_string(iv.tau) + " is outside [" + std::to_string(p + 1) + ", " +
                          std::to_string(n) + "]");
    }
    if (!(iv.kappa >= 0.0)) throw DomainError("cannot correct for a negative intervention size");
    if (static_cast<int>(lambdas.size()) != n) throw ConfigError("need one lambda per time point");

    std::vector<Count> out(series.values().begin(), series.values().end());
    for (int t = iv.tau; t <= n; ++t) {
        const double iv_mean = intervention_mean(iv, t);
        if (iv_mean == 0.0) continue;
        double lag_mean = lambdas[static_cast<std::size_t>(t - 1)];
        for (int i = 1; i <= p; ++i) {
            const auto lag = static_cast<double>(out[static_cast<std::size_t>(t - 1 - i)]);
            lag_mean += alphas[static_cast<std::size_t>(i - 1)] * lag;
        }
        if (!(lag_mean > 0.0)) throw DomainError("lag mean is not positive at t = " + std::to_string(t));
        auto& y = out[static_cast<std::size_t>(t - 1)];
        // the small offset keeps exact integer ratios from flooring one below
        const double expected = conditional_effect_mean(y, lag_mean, iv_mean);
        const auto effect = static_cast<Count>(std::floor(expected + 1e-9));
        y -= std::clamp<Count>(effect, 0, y);
    }
    return series.with_values(std::move(out));
}

std::string_view to_string(Termination reason) noexcept {
    switch (reason) {
        case Termination::kNoDetection: return "no-detection";
        case Termination::kIterationCap: return "iteration-cap";
        case Termination::kNegativeEffect: return "negative-effect";
        case Termination::kFailure: return "failure";
    }
    return "unknown";
}

namespace {

void validate(const DetectionConfig& config, int n) {
    if (config.order < 1) throw ConfigError("detection needs order >= 1");
    if (config.max_iterations < 1) throw ConfigError("max iterations must be >= 1");
    if (config.mode == DetectionMode::kBootstrap && config.replicates < 1) {
        throw ConfigError("bootstrap needs at least one replicate");
    }
    if (!(config.level > 0.0 && config.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
    if (config.delta_grid.empty()) throw ConfigError("the delta grid is empty");
    if (config.covariates && config.covariates->rows() < n) {
        throw ConfigError("covariates have fewer rows than the series");
    }
    (void)default_tau_range(n, config.order, config.edge_margin);
}

struct CleanFits {
    std::optional<ClsFit> cls;
    std::optional<CmlFit> cml;
};

CleanFits clean_fits(const CountSeries& series, const ConditionalModel& model, const CmlOptions& options,
                     std::vector<std::string>& warnings) {
    CleanFits fits;
    if (model.constant_mean()) {
        try {
            fits.cls = fit_cls(series, model.order);
        } catch (const Error& e) {
            warnings.push_back(std::string("clean CLS fit failed: ") + e.what());
        }
    }
    try {
        fits.cml = fit_cml(series, model, options);
        if (!fits.cml->converged) warnings.emplace_back("clean CML fit did not converge");
    } catch (const Error& e) {
        warnings.push_back(std::string("clean CML fit failed: ") + e.what());
    }
    return fits;
}

struct AlternativeFit {
    std::vector<double> alphas;
    Eigen::VectorXd mean_params;
    std::vector<double> lambdas;
    double kappa = 0;
};

AlternativeFit fit_alternative(const CountSeries& series, const ConditionalModel& null_model, TestMethod method,
                               const InterventionProfile& profile, const CmlOptions& options) {
    AlternativeFit alt;
    const int n = series.length();
    if (method == TestMethod::kF) {
        const ClsFit fit = fit_cls(series, null_model.order, {profile});
        alt.alphas = fit.alphas;
        alt.mean_params = Eigen::VectorXd::Constant(1, fit.lambda);
        alt.lambdas.assign(static_cast<std::size_t>(n), fit.lambda);
        alt.kappa = fit.kappas.at(0);
        return alt;
    }
    const ConditionalModel model = null_model.with_profiles({profile});
    const CmlFit fit = fit_cml(series, model, options);
    if (!fit.converged) {
        throw ConvergenceError("alternative CML fit at tau = " + std::to_string(profile.tau) +
                               " did not converge (gradient " + std::to_string(fit.gradient_norm) + ")");
    }
    alt.alphas = fit.theta.alphas();
    alt.mean_params = fit.theta.mean_params();
    for (int t = 1; t <= n; ++t) alt.lambdas.push_back(innovation_mean(fit.theta, model, t));
    alt.kappa = fit.theta.kappa(0);
    return alt;
}

}  // namespace

DetectionReport run_iterative_detection(const CountSeries& series, const DetectionConfig& config) {
    const int n = series.length();
    validate(config, n);
    const ConditionalModel null_model{config.order, config.covariates, {}};
    double critical = 0.0;
    if (config.mode == DetectionMode::kCriticalValue) {
        critical = config.critical_value ? *config.critical_value
                                         : approximate_critical_value(n, config.method, config.level);
    }
    const RandomStream master(config.seed);
    const std::uint64_t method_tag = config.method == TestMethod::kF ? 0 : 1;

    DetectionReport report(series);
    CountSeries current = series;
    bool capped = true;
    for (int j = 1; j <= config.max_iterations; ++j) {
        DetectionIteration it(j, current);
        auto fits = clean_fits(current, null_model, config.cml, it.warnings);
        it.cls = std::move(fits.cls);
        it.cml = std::move(fits.cml);
        try {
            bool significant = false;
            InterventionProfile profile;
            if (config.mode == DetectionMode::kBootstrap) {
                BootstrapOptions opts;
                opts.replicates = config.replicates;
                opts.level = config.level;
                opts.delta_grid = config.delta_grid;
                opts.edge_margin = config.edge_margin;
                opts.threads = config.threads;
                opts.cml = config.cml;
                auto bs = bootstrap_test(current, null_model, config.method, opts,
                                         master.substream({static_cast<std::uint64_t>(j), method_tag}));
                if (bs.null.clipped) {
                    it.warnings.emplace_back("bootstrap null estimates were clipped into the stationary region");
                }
                if (bs.failed_replicates > 0) {
                    it.warnings.push_back(std::to_string(bs.failed_replicates) +
                                          " bootstrap replicates failed and were dropped");
                }
                significant = bs.significant;
                if (bs.chosen) {
                    profile = {bs.chosen->tau, bs.chosen->delta};
                    it.p_value = bs.chosen->p_value;
                    it.statistic = bs.chosen->statistic;
                }
                it.bootstrap = std::move(bs);
            } else {
                const StatisticScanner scanner(current, null_model, config.method, config.cml);
                auto scan = max_statistic(scanner, config.delta_grid,
                                          default_tau_range(n, config.order, config.edge_margin), config.level,
                                          critical, config.threads);
                significant = scan.best.available && scan.best.significant;
                profile = {scan.best.tau, scan.best.delta};
                it.p_value = scan.best.p_value;
                it.statistic = scan.best.statistic;
                it.critical_value = critical;
                it.scan = std::move(scan);
            }
            if (!significant) {
                report.iterations.push_back(std::move(it));
                report.reason = Termination::kNoDetection;
                capped = false;
                break;
            }

            const AlternativeFit alt = fit_alternative(current, null_model, config.method, profile, config.cml);
            const Intervention iv{profile.tau, profile.delta, alt.kappa};
            it.detected = true;
            it.intervention = iv;
            it.alt_alphas = alt.alphas;
            it.alt_mean_params = alt.mean_params;
            report.interventions.push_back(iv);
            if (alt.kappa < 0.0) {
                it.warnings.emplace_back("negative intervention size estimate; series not corrected");
                report.iterations.push_back(std::move(it));
                report.reason = Termination::kNegativeEffect;
                capped = false;
                break;
            }
            current = correct_series(current, alt.alphas, alt.lambdas, iv);
            it.corrected = true;
            it.series = current;
            report.iterations.push_back(std::move(it));
        } catch (const Error& e) {
            report.iterations.push_back(std::move(it));
            report.reason = Termination::kFailure;
            report.failure = e.what();
            capped = false;
            break;
        }
    }
    if (capped) report.reason = Termination::kIterationCap;

    std::vector<std::string> final_warnings;
    auto fits = clean_fits(current, null_model, config.cml, final_warnings);
    report.final_cls = std::move(fits.cls);
    report.final_cml = std::move(fits.cml);
    report.final_series = current;
    for (const auto& it : report.iterations) {
        for (const auto& w : it.warnings) report.warnings.push_back("iteration " + std::to_string(it.index) + ": " + w);
    }
    for (auto& w : final_warnings) report.warnings.push_back("final fit: " + w);
    return report;
}

}  // namespace inar
