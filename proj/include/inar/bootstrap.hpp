#pragma once

#include "inar/random.hpp"
#include "inar/statistics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace inar {

/// Clean-model parameters that generate bootstrap replicates.
struct NullEstimate {
    std::vector<double> alphas;
    Eigen::VectorXd mean_params;   ///< (lambda) or betas
    bool clipped = false;          ///< CLS estimates were moved into the stationary region
};

/// CLS estimates for the F path (clipped to alpha_i in [0, 0.99 (1 - others)],
/// lambda >= 1e-4) and the CML fit for the score path.
[[nodiscard]] NullEstimate null_estimate(const StatisticScanner& scanner);

/// One replicate of length n from the fitted clean model.
///
/// A constant mean uses the usual burn-in. A log-linear mean has no stationary
/// law, so the replicate keeps the first p observed values and simulates
/// t = p+1..n from them on the observed covariate rows.
[[nodiscard]] CountSeries simulate_null_replicate(const NullEstimate& estimate, const ConditionalModel& model,
                                                  const CountSeries& observed, const RandomStream& rng);

/// (N + 1) / (B + 1) where N counts replicate maxima not smaller than `observed`.
[[nodiscard]] double bootstrap_p_value(double observed, std::span<const double> replicate_maxima);

struct BootstrapOptions {
    int replicates = 500;
    double level = 0.05;
    std::vector<double> delta_grid = default_delta_grid();
    std::optional<TauRange> tau_range;   ///< default: default_tau_range(n, p, edge_margin)
    int edge_margin = 0;
    int threads = 1;
    CmlOptions cml;
};

struct DeltaBootstrap {
    double delta = 0;
    int tau = 0;              ///< observed arg-max
    double observed = 0;      ///< observed maximum over tau
    double kappa_hat = 0;
    int exceedances = 0;      ///< N: replicate maxima >= observed
    int effective = 0;        ///< replicates with an available maximum for this delta
    double p_value = 1;       ///< (N + 1) / (effective + 1)
    bool available = false;
};

struct BootstrapChoice {
    double delta = 0;
    int tau = 0;
    double statistic = 0;
    double p_value = 1;
    double kappa_hat = 0;
};

struct BootstrapResult {
    TestMethod method = TestMethod::kF;
    std::vector<DeltaBootstrap> per_delta;   ///< grid order
    int replicates = 0;                      ///< B requested
    int failed_replicates = 0;               ///< replicates whose null fit or scan failed
    std::vector<std::string> failures;       ///< first few failure messages
    std::optional<BootstrapChoice> chosen;   ///< smallest p-value, ties toward larger delta
    bool significant = false;                ///< chosen p-value < level
    NullEstimate null;
    MaxResult observed;
};

/// Parametric bootstrap of the per-delta maximum statistics.
///
/// Replicate b draws from rng.substream(b). Replicates that cannot be scanned
/// (for instance an all-zero replicate) are dropped and counted in
/// failed_replicates; p-values use the remaining count.
[[nodiscard]] BootstrapResult bootstrap_test(const CountSeries& series, const ConditionalModel& null_model,
                                             TestMethod method, const BootstrapOptions& options,
                                             const RandomStream& rng);

}  // namespace inar
