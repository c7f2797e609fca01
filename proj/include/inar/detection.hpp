#pragma once

#include "inar/bootstrap.hpp"
#include "inar/cls.hpp"
#include "inar/cml.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace inar {

/// E(U_t | Y_t = y, past) = y * iv_mean / (lag_mean + iv_mean), the mean of
/// Binomial(y, iv_mean / (lag_mean + iv_mean)).
[[nodiscard]] double conditional_effect_mean(Count y, double lag_mean, double iv_mean);

/// Removes an estimated intervention effect from the series.
///
/// For t >= tau, sequentially, U_t = floor(E(U_t | Y_t)) with the lag mean
/// built from already-corrected values, and Y_t is replaced by Y_t - U_t.
/// `lambdas` holds lambda_t for t = 1..n. Throws DomainError for a negative
/// kappa, tau outside [p+1, n] or a non-positive lag mean.
[[nodiscard]] CountSeries correct_series(const CountSeries& series, std::span<const double> alphas,
                                         std::span<const double> lambdas, const Intervention& iv);

enum class DetectionMode { kBootstrap, kCriticalValue };

struct DetectionConfig {
    TestMethod method = TestMethod::kScore;
    int order = 1;
    std::shared_ptr<const Eigen::MatrixXd> covariates;   ///< null for a constant mean
    std::vector<double> delta_grid = default_delta_grid();
    int edge_margin = 0;
    DetectionMode mode = DetectionMode::kBootstrap;
    int replicates = 500;
    /// Critical-value mode: overrides the tabulated constant when set.
    std::optional<double> critical_value;
    double level = 0.05;
    int max_iterations = 10;
    int threads = 1;
    std::uint64_t seed = 0;
    CmlOptions cml;
};

enum class Termination { kNoDetection, kIterationCap, kNegativeEffect, kFailure };

[[nodiscard]] std::string_view to_string(Termination reason) noexcept;

struct DetectionIteration {
    DetectionIteration(int index, CountSeries series) : index(index), series(std::move(series)) {}

    int index = 0;                      ///< 1-based
    std::optional<ClsFit> cls;          ///< clean-model fits on the series entering this iteration
    std::optional<CmlFit> cml;
    std::optional<BootstrapResult> bootstrap;
    std::optional<MaxResult> scan;      ///< critical-value mode
    double critical_value = 0;          ///< critical-value mode
    bool detected = false;
    std::optional<Intervention> intervention;   ///< (tau, delta) detected, kappa from the alternative fit
    double p_value = 1;                 ///< bootstrap p-value, or the pointwise one in critical-value mode
    double statistic = 0;
    std::vector<double> alt_alphas;     ///< alternative-fit estimates used for the correction
    Eigen::VectorXd alt_mean_params;
    bool corrected = false;
    CountSeries series;                 ///< after this iteration's correction
    std::vector<std::string> warnings;
};

struct DetectionReport {
    explicit DetectionReport(CountSeries final_series) : final_series(std::move(final_series)) {}

    std::vector<DetectionIteration> iterations;
    std::vector<Intervention> interventions;   ///< detections in order
    std::optional<ClsFit> final_cls;            ///< clean-model fits on the final series
    std::optional<CmlFit> final_cml;
    CountSeries final_series;
    Termination reason = Termination::kNoDetection;
    std::string failure;                        ///< message when reason is kFailure
    std::vector<std::string> warnings;
};

/// Iterative detect, classify and correct loop.
///
/// Each iteration fits the clean model, tests the maximum statistic (by
/// bootstrap or against a critical value), refits with the chosen (tau, delta)
/// by the same method (CLS for F, CML for score) and corrects the series.
/// Bootstrap replicates of iteration j use substream (j, method) of the seed.
[[nodiscard]] DetectionReport run_iterative_detection(const CountSeries& series, const DetectionConfig& config);

}  // namespace inar
