#pragma once

#include "inar/model.hpp"
#include "inar/series.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace inar {

/// log k!, tabulated for small k.
[[nodiscard]] double log_factorial(Count k);

[[nodiscard]] double poisson_log_pmf(Count y, double mean);

/// log of the binomial(trials, prob) pmf at k; -inf outside the support.
[[nodiscard]] double binomial_log_pmf(Count k, Count trials, double prob);

/// log p(y | y_{t-1..t-p}): the pmf of sum_i alpha_i o lag_i + Pois(mean) at y.
///
/// Evaluated in log space by log-sum-exp over the nested convolution. A
/// negative `y` or lag yields -inf, which is the convention the shifted
/// probabilities in the score and Hessian rely on.
[[nodiscard]] double transition_log_prob(Count y, std::span<const Count> lags, std::span<const double> alphas,
                                         double mean);

/// log p(y | lag) for y = 0..y_max in the single-lag model.
[[nodiscard]] std::vector<double> transition_log_pmf_row(Count lag, double alpha, double mean, Count y_max);

/// Block layout of theta = (alpha_1..alpha_p, mean parameters, kappa_1..kappa_J).
struct ParameterLayout {
    int order = 1;
    int mean_dim = 1;       ///< 1 for a constant lambda, else the number of betas
    int interventions = 0;

    [[nodiscard]] int size() const noexcept { return order + mean_dim + interventions; }
    [[nodiscard]] int alpha(int i) const noexcept { return i; }
    [[nodiscard]] int mean(int k) const noexcept { return order + k; }
    [[nodiscard]] int kappa(int j) const noexcept { return order + mean_dim + j; }

    friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;
};

/// Structure of the conditional model, independent of parameter values:
/// order, innovation-mean shape and the (tau, delta) of each intervention.
struct ConditionalModel {
    int order = 1;
    /// Covariates for lambda_t = exp(x_t' beta); null for a constant lambda. Row t-1 is time t.
    std::shared_ptr<const Eigen::MatrixXd> covariates;
    std::vector<InterventionProfile> profiles;

    [[nodiscard]] bool constant_mean() const noexcept { return covariates == nullptr; }
    [[nodiscard]] ParameterLayout layout() const;
    [[nodiscard]] ConditionalModel with_profiles(std::vector<InterventionProfile> profiles) const;
};

/// Parameter vector with its block layout.
class ThetaVector {
public:
    ThetaVector(ParameterLayout layout, Eigen::VectorXd values);

    /// Constant-mean convenience: (alphas, lambda, kappas).
    static ThetaVector constant(std::vector<double> alphas, double lambda, std::vector<double> kappas = {});
    /// Log-linear convenience: (alphas, betas, kappas).
    static ThetaVector log_linear(std::vector<double> alphas, const Eigen::VectorXd& betas,
                                  std::vector<double> kappas = {});

    [[nodiscard]] const ParameterLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::VectorXd& values() noexcept { return values_; }

    [[nodiscard]] double alpha(int i) const { return values_(layout_.alpha(i)); }
    [[nodiscard]] std::vector<double> alphas() const;
    [[nodiscard]] Eigen::VectorXd mean_params() const { return values_.segment(layout_.mean(0), layout_.mean_dim); }
    [[nodiscard]] double kappa(int j) const { return values_(layout_.kappa(j)); }
    [[nodiscard]] std::vector<double> kappas() const;

    /// Same alpha and mean blocks, with `extra` zero-valued kappas appended.
    [[nodiscard]] ThetaVector with_zero_kappas(int extra) const;

private:
    ParameterLayout layout_;
    Eigen::VectorXd values_;
};

/// lambda_t (without intervention effects) for 1-based t.
[[nodiscard]] double innovation_mean(const ThetaVector& theta, const ConditionalModel& model, int t);

/// lambda_t + sum_j kappa_j delta_j^(t - tau_j) 1(t >= tau_j).
[[nodiscard]] double transition_mean(const ThetaVector& theta, const ConditionalModel& model, int t);

/// Sum over t = p+1..n of log p(y_t | y_{t-1..t-p}).
/// Throws DomainError (naming t) when theta is infeasible.
[[nodiscard]] double conditional_loglik(const ThetaVector& theta, const CountSeries& series,
                                        const ConditionalModel& model);

/// Analytic gradient of conditional_loglik (length p + mean_dim + J).
[[nodiscard]] Eigen::VectorXd score_vector(const ThetaVector& theta, const CountSeries& series,
                                           const ConditionalModel& model);

/// Analytic second derivatives of conditional_loglik.
[[nodiscard]] Eigen::MatrixXd hessian_matrix(const ThetaVector& theta, const CountSeries& series,
                                             const ConditionalModel& model);

/// Derivatives of log p(y | lags; alpha, mean) for one transition, with
/// respect to each alpha_i and to the transition mean.
struct TransitionDerivatives {
    double log_prob = 0;
    double d_mean = 0;
    double d2_mean = 0;
    Eigen::VectorXd d_alpha;
    Eigen::MatrixXd d2_alpha;
    Eigen::VectorXd d_alpha_mean;
};

enum class DerivativeOrder { kValue, kGradient, kHessian };

[[nodiscard]] TransitionDerivatives transition_derivatives(Count y, std::span<const Count> lags,
                                                           std::span<const double> alphas, double mean,
                                                           DerivativeOrder order);

struct LikelihoodEvaluation {
    double loglik = 0;
    Eigen::VectorXd gradient;   ///< empty for kValue
    Eigen::MatrixXd hessian;    ///< empty unless kHessian
};

/// Shared implementation of loglik / score / Hessian in a single pass over t.
[[nodiscard]] LikelihoodEvaluation evaluate_likelihood(const ThetaVector& theta, const CountSeries& series,
                                                       const ConditionalModel& model, DerivativeOrder order);

/// Throws DomainError unless alpha_i in [0, 1), sum alpha < 1 and every transition mean is positive.
void check_feasible(const ThetaVector& theta, const CountSeries& series, const ConditionalModel& model);

}  // namespace inar
