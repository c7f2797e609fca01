#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <vector>

namespace inar {

/// Innovation mean lambda_t: either a constant or exp(x_t' beta).
///
/// Covariate row r (0-based) belongs to time t = r + 1. The covariate matrix
/// is shared, so copies of a MeanSpec are cheap.
class MeanSpec {
public:
    static MeanSpec constant(double lambda);
    static MeanSpec log_linear(Eigen::VectorXd betas, Eigen::MatrixXd covariates);
    static MeanSpec log_linear(Eigen::VectorXd betas, std::shared_ptr<const Eigen::MatrixXd> covariates);

    [[nodiscard]] bool is_constant() const noexcept { return covariates_ == nullptr; }

    /// lambda_t for 1-based t. The constant form ignores t.
    [[nodiscard]] double at(int t) const;

    [[nodiscard]] double lambda() const;
    [[nodiscard]] const Eigen::VectorXd& betas() const;
    [[nodiscard]] const std::shared_ptr<const Eigen::MatrixXd>& covariates() const noexcept {
        return covariates_;
    }

    /// Number of covariate rows, or nullopt for the constant form.
    [[nodiscard]] std::optional<int> rows() const;

private:
    MeanSpec() = default;

    double lambda_ = 0.0;
    Eigen::VectorXd betas_;
    std::shared_ptr<const Eigen::MatrixXd> covariates_;
};

/// Poisson INAR(p): Y_t = sum_i alpha_i o Y_{t-i} + e_t, e_t ~ Pois(lambda_t).
class InarModel {
public:
    InarModel(std::vector<double> alphas, MeanSpec mean);

    [[nodiscard]] int order() const noexcept { return static_cast<int>(alphas_.size()); }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    [[nodiscard]] const MeanSpec& mean() const noexcept { return mean_; }
    [[nodiscard]] double alpha_sum() const noexcept;

private:
    std::vector<double> alphas_;
    MeanSpec mean_;
};

/// Time and type of an intervention, without its size.
struct InterventionProfile {
    int tau = 1;        ///< onset, 1-based
    double delta = 0;   ///< decay rate in [0, 1]

    friend bool operator==(const InterventionProfile&, const InterventionProfile&) = default;
};

/// One intervention effect: U_t ~ Pois(kappa * delta^(t - tau)) for t >= tau.
struct Intervention {
    int tau = 1;
    double delta = 0;
    double kappa = 0;

    [[nodiscard]] InterventionProfile profile() const { return {tau, delta}; }
    friend bool operator==(const Intervention&, const Intervention&) = default;
};

/// delta^(t - tau) for t >= tau and 0 before; 0^0 = 1 so delta = 0 hits once.
[[nodiscard]] double decay_weight(const InterventionProfile& profile, int t);

/// kappa * delta^(t - tau) * 1(t >= tau).
[[nodiscard]] double intervention_mean(const Intervention& iv, int t);

/// lambda / (1 - sum alpha). Requires a constant mean.
[[nodiscard]] double stationary_mean(const InarModel& model);

/// Throws DomainError unless delta in [0, 1] and tau >= 1.
void validate_profile(const InterventionProfile& profile);

}  // namespace inar
