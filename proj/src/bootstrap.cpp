#include "inar/bootstrap.hpp"

#include "inar/errors.hpp"
#include "inar/parallel.hpp"
#include "inar/simulate.hpp"

#include <algorithm>
#include <variant>

namespace inar {

NullEstimate null_estimate(const StatisticScanner& scanner) {
    NullEstimate est;
    if (const auto* f = scanner.f()) {
        const ClsFit& fit = f->null_fit();
        double used = 0.0;
        for (double a : fit.alphas) {
            const double clipped = std::clamp(a, 0.0, 0.99 * (1.0 - used));
            est.clipped = est.clipped || clipped != a;
            est.alphas.push_back(clipped);
            used += clipped;
        }
        est.mean_params = Eigen::VectorXd::Constant(1, std::max(fit.lambda, 1e-4));
        est.clipped = est.clipped || fit.lambda < 1e-4;
    } else {
        const ThetaVector& theta = scanner.score()->null_fit().theta;
        est.alphas = theta.alphas();
        est.mean_params = theta.mean_params();
    }
    return est;
}

CountSeries simulate_null_replicate(const NullEstimate& estimate, const ConditionalModel& model,
                                    const CountSeries& observed, const RandomStream& rng) {
    const int n = observed.length();
    if (model.constant_mean()) {
        return simulate(InarModel(estimate.alphas, MeanSpec::constant(estimate.mean_params(0))), n, rng);
    }
    const int p = model.order;
    SimulationOptions opts;
    opts.burn_in = 0;
    opts.covariate_offset = p;
    for (int i = 1; i <= p; ++i) opts.initial_state.push_back(observed.at(p + 1 - i));
    const auto tail = simulate_contaminated(InarModel(estimate.alphas, MeanSpec::log_linear(estimate.mean_params,
                                                                                           model.covariates)),
                                            {}, n - p, opts, rng);
    std::vector<Count> values(observed.values().begin(), observed.values().begin() + p);
    values.insert(values.end(), tail.values().begin(), tail.values().end());
    return CountSeries(std::move(values));
}

double bootstrap_p_value(double observed, std::span<const double> replicate_maxima) {
    const auto exceed = std::count_if(replicate_maxima.begin(), replicate_maxima.end(),
                                      [observed](double m) { return m >= observed; });
    return (static_cast<double>(exceed) + 1.0) / (static_cast<double>(replicate_maxima.size()) + 1.0);
}

namespace {

constexpr std::size_t kKeptFailures = 5;

}  // namespace

BootstrapResult bootstrap_test(const CountSeries& series, const ConditionalModel& null_model, TestMethod method,
                               const BootstrapOptions& options, const RandomStream& rng) {
    if (options.replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
    const StatisticScanner scanner(series, null_model, method, options.cml);
    const TauRange range =
        options.tau_range.value_or(default_tau_range(series.length(), null_model.order, options.edge_margin));

    BootstrapResult result;
    result.method = method;
    result.replicates = options.replicates;
    result.null = null_estimate(scanner);
    result.observed = max_statistic(scanner, options.delta_grid, range, options.level, std::nullopt, options.threads);

    // replicate maxima per delta, or the failure message
    using Outcome = std::variant<std::vector<std::optional<double>>, std::string>;
    std::vector<Outcome> outcomes(static_cast<std::size_t>(options.replicates));
    parallel_for(outcomes.size(), options.threads, [&](std::size_t b) {
        try {
            const auto rep = simulate_null_replicate(result.null, null_model, series, rng.substream(b));
            const StatisticScanner rep_scan(rep, null_model, method, options.cml);
            const auto rep_max = max_statistic(rep_scan, options.delta_grid, range, options.level);
            std::vector<std::optional<double>> maxima;
            for (const auto& dm : rep_max.per_delta) {
                maxima.push_back(dm.available ? std::optional<double>(dm.statistic) : std::nullopt);
            }
            outcomes[b] = std::move(maxima);
        } catch (const Error& e) {
            outcomes[b] = "replicate " + std::to_string(b) + ": " + e.what();
        }
    });

    for (const auto& dm : result.observed.per_delta) {
        DeltaBootstrap db;
        db.delta = dm.delta;
        db.tau = dm.tau;
        db.observed = dm.statistic;
        db.kappa_hat = dm.kappa_hat;
        db.available = dm.available;
        result.per_delta.push_back(db);
    }
    std::vector<std::vector<double>> replicate_maxima(result.per_delta.size());
    for (const auto& outcome : outcomes) {
        if (const auto* msg = std::get_if<std::string>(&outcome)) {
            ++result.failed_replicates;
            if (result.failures.size() < kKeptFailures) result.failures.push_back(*msg);
            continue;
        }
        const auto& maxima = std::get<0>(outcome);
        for (std::size_t k = 0; k < maxima.size(); ++k) {
            if (maxima[k]) replicate_maxima[k].push_back(*maxima[k]);
        }
    }
    for (std::size_t k = 0; k < result.per_delta.size(); ++k) {
        auto& db = result.per_delta[k];
        const auto& maxima = replicate_maxima[k];
        if (!db.available || maxima.empty()) {
            db.available = false;
            continue;
        }
        db.effective = static_cast<int>(maxima.size());
        db.exceedances = static_cast<int>(std::count_if(maxima.begin(), maxima.end(),
                                                        [&db](double m) { return m >= db.observed; }));
        db.p_value = bootstrap_p_value(db.observed, maxima);
        const bool better = !result.chosen || db.p_value < result.chosen->p_value ||
                            (db.p_value == result.chosen->p_value && db.delta > result.chosen->delta);
        if (better) result.chosen = BootstrapChoice{db.delta, db.tau, db.observed, db.p_value, db.kappa_hat};
    }
    result.significant = result.chosen && result.chosen->p_value < options.level;
    return result;
}

}  // namespace inar
