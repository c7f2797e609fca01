#include "inar/model.hpp"

#include "inar/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace inar {

MeanSpec MeanSpec::constant(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("constant innovation mean must be positive, got " + std::to_string(lambda));
    }
    MeanSpec spec;
    spec.lambda_ = lambda;
    return spec;
}

MeanSpec MeanSpec::log_linear(Eigen::VectorXd betas, Eigen::MatrixXd covariates) {
    return log_linear(std::move(betas), std::make_shared<const Eigen::MatrixXd>(std::move(covariates)));
}

MeanSpec MeanSpec::log_linear(Eigen::VectorXd betas, std::shared_ptr<const Eigen::MatrixXd> covariates) {
    if (!covariates) throw ConfigError("log-linear mean requires a covariate matrix");
    if (covariates->cols() != betas.size()) {
        throw ConfigError("log-linear mean has " + std::to_string(betas.size()) + " coefficients but " +
                          std::to_string(covariates->cols()) + " covariate columns");
    }
    if (!covariates->allFinite() || !betas.allFinite()) {
        throw DomainError("log-linear mean has non-finite coefficients or covariates");
    }
    MeanSpec spec;
    spec.betas_ = std::move(betas);
    spec.covariates_ = std::move(covariates);
    return spec;
}

double MeanSpec::at(int t) const {
    if (is_constant()) return lambda_;
    if (t < 1 || t > covariates_->rows()) {
        throw ConfigError("no covariate row for t=" + std::to_string(t));
    }
    return std::exp(covariates_->row(t - 1).dot(betas_));
}

double MeanSpec::lambda() const {
    if (!is_constant()) throw UnsupportedError("log-linear mean has no single lambda");
    return lambda_;
}

const Eigen::VectorXd& MeanSpec::betas() const {
    if (is_constant()) throw UnsupportedError("constant mean has no regression coefficients");
    return betas_;
}

std::optional<int> MeanSpec::rows() const {
    if (is_constant()) return std::nullopt;
    return static_cast<int>(covariates_->rows());
}

InarModel::InarModel(std::vector<double> alphas, MeanSpec mean)
    : alphas_(std::move(alphas)), mean_(std::move(mean)) {
    if (alphas_.empty()) throw DomainError("INAR order must be at least 1");
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
        if (!(alphas_[i] >= 0.0 && alphas_[i] < 1.0)) {
            throw DomainError("alpha_" + std::to_string(i + 1) + " must lie in [0, 1)");
        }
    }
    if (!(alpha_sum() < 1.0)) throw DomainError("sum of alphas must be < 1 for stationarity");
}

double InarModel::alpha_sum() const noexcept {
    return std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
}

double decay_weight(const InterventionProfile& profile, int t) {
    if (t < profile.tau) return 0.0;
    const int lag = t - profile.tau;
    if (lag == 0) return 1.0;
    if (profile.delta == 0.0) return 0.0;
    if (profile.delta == 1.0) return 1.0;
    return std::pow(profile.delta, lag);
}

double intervention_mean(const Intervention& iv, int t) {
    return iv.kappa * decay_weight(iv.profile(), t);
}

double stationary_mean(const InarModel& model) {
    if (!model.mean().is_constant()) {
        throw UnsupportedError("stationary mean is undefined for a time-varying innovation mean");
    }
    return model.mean().lambda() / (1.0 - model.alpha_sum());
}

void validate_profile(const InterventionProfile& profile) {
    if (!(profile.delta >= 0.0 && profile.delta <= 1.0)) {
        throw DomainError("intervention decay must lie in [0, 1], got " + std::to_string(profile.delta));
    }
    if (profile.tau < 1) throw DomainError("intervention time must be >= 1");
}

}  // namespace inar
