#pragma once

#include "inar/cml.hpp"
#include "inar/information.hpp"
#include "inar/likelihood.hpp"

#include <Eigen/Dense>

#include <vector>

namespace inar {

/// One (tau, delta) cell of the score scan.
struct ScoreCell {
    double statistic = 0;
    double kappa_hat = 0;   ///< one-step estimate, the kappa entry of I^{-1} V
};

/// S = v' I^{-1} v and the last entry of I^{-1} v. Throws SingularityError unless I is well conditioned.
[[nodiscard]] ScoreCell score_quadratic_form(const Eigen::VectorXd& v, const Eigen::MatrixXd& info);

/// Score statistics S = V' I^{-1} V for many intervention profiles against one null fit.
///
/// The clean INAR(1) model is fitted once by CML. For a constant mean, I is the
/// expected information from the truncated stationary sums. A log-linear mean
/// has no stationary law, so I is the conditional information: the sum over t
/// of E(-d2 log p(Y_t | y_{t-1})) given the observed lag, at the null fit.
class ScoreScanner {
public:
    /// Throws UnsupportedError unless the model has order 1 and no profiles,
    /// and ConvergenceError when the null fit does not converge.
    ScoreScanner(const CountSeries& series, ConditionalModel null_model, const CmlOptions& options = {});

    [[nodiscard]] const CmlFit& null_fit() const noexcept { return fit_; }
    [[nodiscard]] int length() const noexcept { return n_; }

    /// Throws DomainError for tau outside [2, n] and SingularityError when
    /// the extended information is not safely invertible.
    [[nodiscard]] ScoreCell evaluate(const InterventionProfile& profile) const;

    /// The extended information matrix used for `profile`.
    [[nodiscard]] Eigen::MatrixXd information(const InterventionProfile& profile) const;

    /// The extended score at (theta_null, kappa = 0).
    [[nodiscard]] Eigen::VectorXd score(const InterventionProfile& profile) const;

private:
    int n_;
    ConditionalModel model_;
    CmlFit fit_;
    Eigen::VectorXd null_gradient_;
    Eigen::MatrixXd base_information_;
    TransitionInformation per_transition_;
    // per transition t = 2..n, index t - 2
    Eigen::VectorXd d_mean_;
    Eigen::VectorXd info_mean_mean_;    ///< log-linear only
    Eigen::VectorXd info_alpha_mean_;
    Eigen::MatrixXd mean_gradient_;     ///< d lambda_t / d beta as rows
};

/// Score statistic for one intervention of type delta at time tau in an INAR(1) model.
[[nodiscard]] double score_statistic(const CountSeries& series, const ConditionalModel& null_model, int tau,
                                     double delta);

}  // namespace inar
