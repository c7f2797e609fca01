#include "inar/information.hpp"

#include "inar/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace inar {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double at(const std::vector<double>& v, Count i) {
    return i < 0 ? kNegInf : v[static_cast<std::size_t>(i)];
}

void check_null_theta(const ThetaVector& theta) {
    const auto& layout = theta.layout();
    if (layout.order != 1) throw UnsupportedError("expected information is implemented for INAR(1) only");
    if (layout.mean_dim != 1) throw UnsupportedError("expected information needs a constant innovation mean");
    for (int j = 0; j < layout.interventions; ++j) {
        if (theta.kappa(j) != 0.0) throw DomainError("expected information is evaluated at kappa = 0");
    }
}

// E(-d2 log p(Y | N)) given lag N, with Y summed over 0..m.
// p0, p1, p2 are log p(. | N), log p(. | N-1), log p(. | N-2) on 0..m.
TransitionInformation lag_information(Count n, double alpha, const std::vector<double>& p0,
                                      const std::vector<double>* p1, const std::vector<double>* p2, Count m) {
    const double nn = static_cast<double>(n);
    double mm = 0.0;
    double am = 0.0;
    double aa = 0.0;
    for (Count y = 0; y <= m; ++y) {
        const double lp = at(p0, y);
        const double q1 = at(p0, y - 1);           // p(y-1 | N)
        mm += std::exp(2.0 * q1 - lp) - std::exp(at(p0, y - 2));
        if (p1 == nullptr) continue;
        const double a1 = at(*p1, y - 1);          // p(y-1 | N-1)
        const double b1 = at(*p1, y - 2);          // p(y-2 | N-1)
        am += std::exp(q1 + a1 - lp) - std::exp(b1);
        const double c2 = p2 == nullptr ? kNegInf : at(*p2, y - 2);  // p(y-2 | N-2)
        aa += nn * std::exp(2.0 * a1 - lp) - 2.0 * std::exp(a1) + std::exp(lp) - (nn - 1.0) * std::exp(c2);
    }
    const double s = 1.0 - alpha;
    TransitionInformation out;
    out.mean_mean = mm;
    out.alpha_mean = nn / s * am;
    out.alpha_alpha = nn / (s * s) * aa;
    out.truncation = static_cast<int>(m);
    return out;
}

}  // namespace

int truncation_point(double mean, double tol) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("truncation needs a positive finite mean");
    if (!(tol > 0.0 && tol < 1.0)) throw DomainError("truncation tolerance must lie in (0, 1)");
    const auto top = static_cast<Count>(std::ceil(mean + 40.0 * std::sqrt(mean) + 60.0));
    // suffix sums from the far tail down, so tiny masses are not lost against 1
    std::vector<double> tail(static_cast<std::size_t>(top + 2), 0.0);
    for (Count k = top; k >= 0; --k) {
        tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k + 1)] + std::exp(poisson_log_pmf(k, mean));
    }
    for (Count m = 0; m <= top; ++m) {
        if (tail[static_cast<std::size_t>(m + 1)] <= tol) return static_cast<int>(m);
    }
    return static_cast<int>(top);
}

TransitionInformation transition_information(double alpha, double lambda, int truncation) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    if (truncation < 2) throw DomainError("truncation point must be at least 2");
    const Count m = truncation;
    const double marginal = lambda / (1.0 - alpha);

    // rows[N] = log p(. | N) on 0..m; N - 1 and N - 2 reuse earlier rows
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(m + 1));
    TransitionInformation out;
    out.truncation = truncation;
    for (Count n = 0; n <= m; ++n) {
        rows.push_back(transition_log_pmf_row(n, alpha, lambda, m));
        const double weight = std::exp(poisson_log_pmf(n, marginal));
        const std::vector<double>* p1 = n >= 1 ? &rows[static_cast<std::size_t>(n - 1)] : nullptr;
        const std::vector<double>* p2 = n >= 2 ? &rows[static_cast<std::size_t>(n - 2)] : nullptr;
        const auto c = lag_information(n, alpha, rows.back(), p1, p2, m);
        out.mean_mean += weight * c.mean_mean;
        out.alpha_mean += weight * c.alpha_mean;
        out.alpha_alpha += weight * c.alpha_alpha;
    }
    return out;
}

TransitionInformation transition_information(double alpha, double lambda, double tol) {
    return transition_information(alpha, lambda, truncation_point(lambda / (1.0 - alpha), tol));
}

TransitionInformation conditional_transition_information(Count lag, double alpha, double mean, double tol) {
    if (lag < 0) throw DomainError("lag must be nonnegative");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0, 1)");
    if (!(mean > 0.0)) throw DomainError("the transition mean must be positive");
    const Count m = lag + truncation_point(mean, tol);
    const auto p0 = transition_log_pmf_row(lag, alpha, mean, m);
    const auto p1 = lag >= 1 ? transition_log_pmf_row(lag - 1, alpha, mean, m) : std::vector<double>{};
    const auto p2 = lag >= 2 ? transition_log_pmf_row(lag - 2, alpha, mean, m) : std::vector<double>{};
    return lag_information(lag, alpha, p0, lag >= 1 ? &p1 : nullptr, lag >= 2 ? &p2 : nullptr, m);
}

Eigen::MatrixXd expected_information_truncated(const ThetaVector& theta, int n,
                                               const std::vector<InterventionProfile>& profiles, int truncation) {
    check_null_theta(theta);
    if (static_cast<int>(profiles.size()) != theta.layout().interventions) {
        throw ConfigError("profile count does not match the parameter layout");
    }
    if (n < 2) throw ConfigError("expected information needs n >= 2");
    const double alpha = theta.alpha(0);
    const double lambda = theta.mean_params()(0);
    const auto e = transition_information(alpha, lambda, truncation);

    const int j_count = static_cast<int>(profiles.size());
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(2 + j_count, 2 + j_count);
    const double transitions = n - 1;
    info(0, 0) = transitions * e.alpha_alpha;
    info(0, 1) = info(1, 0) = transitions * e.alpha_mean;
    info(1, 1) = transitions * e.mean_mean;
    std::vector<Eigen::VectorXd> weights;
    for (const auto& prof : profiles) {
        validate_profile(prof);
        Eigen::VectorXd w(n - 1);
        for (int t = 2; t <= n; ++t) w(t - 2) = decay_weight(prof, t);
        weights.push_back(std::move(w));
    }
    for (int j = 0; j < j_count; ++j) {
        const double sum = weights[static_cast<std::size_t>(j)].sum();
        info(0, 2 + j) = info(2 + j, 0) = e.alpha_mean * sum;
        info(1, 2 + j) = info(2 + j, 1) = e.mean_mean * sum;
        for (int k = j; k < j_count; ++k) {
            info(2 + j, 2 + k) = info(2 + k, 2 + j) =
                e.mean_mean * weights[static_cast<std::size_t>(j)].dot(weights[static_cast<std::size_t>(k)]);
        }
    }
    require_well_conditioned(info);
    return info;
}

Eigen::MatrixXd expected_information(const ThetaVector& theta, int n,
                                     const std::vector<InterventionProfile>& profiles, double tol) {
    check_null_theta(theta);
    const double alpha = theta.alpha(0);
    const double lambda = theta.mean_params()(0);
    if (!(alpha >= 0.0 && alpha < 1.0) || !(lambda > 0.0)) throw DomainError("infeasible null parameters");
    return expected_information_truncated(theta, n, profiles, truncation_point(lambda / (1.0 - alpha), tol));
}

void require_well_conditioned(const Eigen::MatrixXd& m, double max_condition) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw SingularityError("eigenvalue computation failed");
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !std::isfinite(hi) || hi / lo > max_condition) {
        throw SingularityError("information matrix is nearly singular (eigenvalues " + std::to_string(lo) + " .. " +
                               std::to_string(hi) + ")");
    }
}

}  // namespace inar
