#pragma once

#include "inar/likelihood.hpp"
#include "inar/random.hpp"
#include "inar/simulate.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace inar::oracle {

using Wide = boost::multiprecision::cpp_bin_float_50;

inline Wide wide_binomial(Count k, Count n, const Wide& a) {
    if (k < 0 || k > n) return 0;
    Wide c = 1;
    for (Count i = 1; i <= k; ++i) c = c * Wide(n - k + i) / Wide(i);
    return c * pow(a, static_cast<int>(k)) * pow(Wide(1) - a, static_cast<int>(n - k));
}

inline Wide wide_poisson(Count y, const Wide& mean) {
    if (y < 0) return 0;
    Wide f = 1;
    for (Count i = 2; i <= y; ++i) f *= Wide(i);
    return exp(-mean) * pow(mean, static_cast<int>(y)) / f;
}

// Direct enumeration of the nested convolution in linear space (p <= 2).
inline Wide wide_transition(Count y, const std::vector<Count>& lags, const std::vector<double>& alphas, double mean) {
    const Wide mu(mean);
    if (lags.empty()) return wide_poisson(y, mu);
    Wide total = 0;
    const Count n1 = lags[0];
    for (Count k1 = 0; k1 <= std::min(n1, y); ++k1) {
        const Wide b1 = wide_binomial(k1, n1, Wide(alphas[0]));
        if (lags.size() == 1) {
            total += b1 * wide_poisson(y - k1, mu);
            continue;
        }
        for (Count k2 = 0; k2 <= std::min(lags[1], y - k1); ++k2) {
            total += b1 * wide_binomial(k2, lags[1], Wide(alphas[1])) * wide_poisson(y - k1 - k2, mu);
        }
    }
    return total;
}

inline double oracle_loglik(const ThetaVector& theta, const CountSeries& s, const ConditionalModel& m) {
    Wide total = 0;
    const auto alphas = theta.alphas();
    for (int t = m.order + 1; t <= s.length(); ++t) {
        std::vector<Count> lags;
        for (int i = 1; i <= m.order; ++i) lags.push_back(s.at(t - i));
        total += log(wide_transition(s.at(t), lags, alphas, transition_mean(theta, m, t)));
    }
    return static_cast<double>(total);
}

struct Instance {
    ThetaVector theta;
    CountSeries series;
    ConditionalModel model;
};

// Random feasible (theta, series, model): p in {1, 2}, constant or log-linear mean, 0..2 interventions.
inline Instance random_instance(RandomStream rng, bool allow_log_linear = true) {
    const int p = rng.uniform() < 0.6 ? 1 : 2;
    const int n = 25 + static_cast<int>(rng.uniform() * 40.0);
    std::vector<double> alphas;
    for (int i = 0; i < p; ++i) alphas.push_back(0.05 + 0.8 * rng.uniform() / p);
    const int j = static_cast<int>(rng.uniform() * 3.0);
    std::vector<InterventionProfile> profiles;
    std::vector<Intervention> ivs;
    std::vector<double> kappas;
    for (int k = 0; k < j; ++k) {
        const InterventionProfile prof{p + 1 + static_cast<int>(rng.uniform() * (n - p)),
                                       std::floor(rng.uniform() * 5.0) / 4.0};
        const double kappa = 0.5 + 6.0 * rng.uniform();
        profiles.push_back(prof);
        ivs.push_back({prof.tau, prof.delta, kappa});
        kappas.push_back(kappa);
    }
    ConditionalModel model{p, nullptr, profiles};
    SimulationOptions opts;
    if (allow_log_linear && rng.uniform() < 0.4) {
        opts.burn_in = 0;
        Eigen::MatrixXd x(n, 3);
        for (int r = 0; r < n; ++r) {
            x(r, 0) = 1.0;
            x(r, 1) = std::sin(2.0 * std::numbers::pi * (r + 1) / 12.0);
            x(r, 2) = static_cast<double>(r + 1) / n;
        }
        Eigen::VectorXd beta(3);
        beta << 0.2 + rng.uniform(), 0.5 * rng.uniform(), 0.3 * rng.uniform();
        auto cov = std::make_shared<const Eigen::MatrixXd>(x);
        model.covariates = cov;
        auto s = simulate_contaminated(InarModel(alphas, MeanSpec::log_linear(beta, cov)), ivs, n, opts, rng);
        return {ThetaVector::log_linear(alphas, beta, kappas), s, model};
    }
    const double lambda = 0.5 + 4.0 * rng.uniform();
    auto s = simulate_contaminated(InarModel(alphas, MeanSpec::constant(lambda)), ivs, n, opts, rng);
    return {ThetaVector::constant(alphas, lambda, kappas), s, model};
}

inline ThetaVector perturbed(const ThetaVector& theta, int k, double h) {
    ThetaVector out = theta;
    out.values()(k) += h;
    return out;
}

/// Dense least squares by SVD, independent of the Cholesky/QR path in fit_cls.
inline Eigen::VectorXd svd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

}  // namespace inar::oracle
