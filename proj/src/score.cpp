#include "inar/score.hpp"

#include "inar/errors.hpp"

#include <array>
#include <string>

namespace inar {

namespace {

CmlFit fit_null(const CountSeries& series, const ConditionalModel& model, const CmlOptions& options) {
    if (model.order != 1) throw UnsupportedError("the score test is available for INAR(1) only");
    if (!model.profiles.empty()) throw ConfigError("the null model must not contain interventions");
    CmlFit fit = fit_cml(series, model, options);
    if (!fit.converged) {
        throw ConvergenceError("null CML fit did not converge (gradient " + std::to_string(fit.gradient_norm) + ")");
    }
    return fit;
}

}  // namespace

ScoreScanner::ScoreScanner(const CountSeries& series, ConditionalModel null_model, const CmlOptions& options)
    : n_(series.length()), model_(std::move(null_model)), fit_(fit_null(series, model_, options)) {

    const ThetaVector& theta = fit_.theta;
    const double alpha = theta.alpha(0);
    const std::array<double, 1> alphas{alpha};
    const int rows = n_ - 1;
    d_mean_.resize(rows);
    for (int t = 2; t <= n_; ++t) {
        const std::array<Count, 1> lags{series.at(t - 1)};
        const double mean = innovation_mean(theta, model_, t);
        d_mean_(t - 2) = transition_derivatives(series.at(t), lags, alphas, mean, DerivativeOrder::kGradient).d_mean;
    }
    null_gradient_ = evaluate_likelihood(theta, series, model_, DerivativeOrder::kGradient).gradient;

    if (model_.constant_mean()) {
        per_transition_ = transition_information(alpha, theta.mean_params()(0));
        base_information_.resize(2, 2);
        base_information_ << per_transition_.alpha_alpha, per_transition_.alpha_mean, per_transition_.alpha_mean,
            per_transition_.mean_mean;
        base_information_ *= rows;
        return;
    }

    const int dim = theta.layout().mean_dim;
    info_mean_mean_.resize(rows);
    info_alpha_mean_.resize(rows);
    mean_gradient_.resize(rows, dim);
    base_information_ = Eigen::MatrixXd::Zero(1 + dim, 1 + dim);
    for (int t = 2; t <= n_; ++t) {
        const double mean = innovation_mean(theta, model_, t);
        const auto e = conditional_transition_information(series.at(t - 1), alpha, mean);
        const Eigen::VectorXd g = mean * model_.covariates->row(t - 1).transpose();
        info_mean_mean_(t - 2) = e.mean_mean;
        info_alpha_mean_(t - 2) = e.alpha_mean;
        mean_gradient_.row(t - 2) = g.transpose();
        base_information_(0, 0) += e.alpha_alpha;
        base_information_.block(1, 0, dim, 1) += e.alpha_mean * g;
        base_information_.block(1, 1, dim, dim) += e.mean_mean * g * g.transpose();
    }
    base_information_.block(0, 1, 1, dim) = base_information_.block(1, 0, dim, 1).transpose();
}

namespace {

Eigen::VectorXd profile_weights(const InterventionProfile& profile, int n) {
    validate_profile(profile);
    if (profile.tau < 2 || profile.tau > n) {
        throw DomainError("tau = " + std::to_string(profile.tau) + " is outside [2, " + std::to_string(n) + "]");
    }
    Eigen::VectorXd w(n - 1);
    for (int t = 2; t <= n; ++t) w(t - 2) = decay_weight(profile, t);
    return w;
}

}  // namespace

Eigen::VectorXd ScoreScanner::score(const InterventionProfile& profile) const {
    const Eigen::VectorXd w = profile_weights(profile, n_);
    const Eigen::Index k = null_gradient_.size();
    Eigen::VectorXd v(k + 1);
    v.head(k) = null_gradient_;
    v(k) = d_mean_.dot(w);
    return v;
}

Eigen::MatrixXd ScoreScanner::information(const InterventionProfile& profile) const {
    const Eigen::VectorXd w = profile_weights(profile, n_);
    const Eigen::Index k = base_information_.rows();
    Eigen::MatrixXd info(k + 1, k + 1);
    info.topLeftCorner(k, k) = base_information_;
    if (model_.constant_mean()) {
        const double sum = w.sum();
        info(0, k) = per_transition_.alpha_mean * sum;
        info(1, k) = per_transition_.mean_mean * sum;
        info(k, k) = per_transition_.mean_mean * w.squaredNorm();
    } else {
        info(0, k) = info_alpha_mean_.dot(w);
        info.block(1, k, k - 1, 1) = mean_gradient_.transpose() * info_mean_mean_.cwiseProduct(w);
        info(k, k) = info_mean_mean_.dot(w.cwiseProduct(w));
    }
    info.row(k).head(k) = info.col(k).head(k).transpose();
    return info;
}

ScoreCell score_quadratic_form(const Eigen::VectorXd& v, const Eigen::MatrixXd& info) {
    if (v.size() != info.rows() || info.rows() != info.cols() || v.size() == 0) {
        throw ConfigError("score and information dimensions differ");
    }
    require_well_conditioned(info);
    const Eigen::VectorXd step = info.ldlt().solve(v);
    return {std::max(0.0, v.dot(step)), step(step.size() - 1)};
}

ScoreCell ScoreScanner::evaluate(const InterventionProfile& profile) const {
    return score_quadratic_form(score(profile), information(profile));
}

double score_statistic(const CountSeries& series, const ConditionalModel& null_model, int tau, double delta) {
    return ScoreScanner(series, null_model).evaluate({tau, delta}).statistic;
}

}  // namespace inar
