#include "inar/cml.hpp"

#include "inar/cls.hpp"
#include "inar/errors.hpp"
#include "inar/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inar {
namespace {

constexpr double kAlphaCeiling = 1.0 - 1e-6;
constexpr double kArmijo = 1e-4;
constexpr double kMaxStep = 10.0;
constexpr double kRoundoff = 1e-12;
constexpr int kStallWindow = 50;

// theta <-> z. For a constant lambda each kappa is a multiple of lambda,
// kappa_j = lambda (e^v_j - c_j) with c_j = (1 - 1e-8) / J, so every transition
// mean stays above 1e-8 lambda wherever lambda moves. For a log-linear mean the
// shift is fixed from the start point instead.
class Reparametrization {
public:
    Reparametrization(const ThetaVector& start, const CountSeries& series, const ConditionalModel& model)
        : layout_(start.layout()), constant_(model.constant_mean()) {
        const int j_count = layout_.interventions;
        for (int j = 0; j < j_count; ++j) {
            if (constant_) {
                shifts_.push_back((1.0 - 1e-8) / j_count);
                continue;
            }
            const auto& prof = model.profiles[static_cast<std::size_t>(j)];
            double room = std::numeric_limits<double>::infinity();
            for (int t = std::max(prof.tau, model.order + 1); t <= series.length(); ++t) {
                const double w = decay_weight(prof, t);
                if (w > 0.0) room = std::min(room, innovation_mean(start, model, t) / w);
            }
            if (!std::isfinite(room)) room = 1.0;
            shifts_.push_back(std::max(0.5 * room / j_count, 2.0 * std::max(0.0, -start.kappa(j))));
        }
    }

    [[nodiscard]] ThetaVector to_theta(const Eigen::VectorXd& z) const {
        Eigen::VectorXd v(z.size());
        const int p = layout_.order;
        if (p > 0) {
            const double top = std::max(0.0, z.head(p).maxCoeff());
            double denom = std::exp(-top);
            for (int i = 0; i < p; ++i) denom += std::exp(z(i) - top);
            for (int i = 0; i < p; ++i) v(i) = kAlphaCeiling * std::exp(z(i) - top) / denom;
        }
        for (int k = 0; k < layout_.mean_dim; ++k) {
            const int idx = layout_.mean(k);
            v(idx) = constant_ ? std::exp(z(idx)) : z(idx);
        }
        const double scale = constant_ ? v(layout_.mean(0)) : 1.0;
        for (int j = 0; j < layout_.interventions; ++j) {
            const int idx = layout_.kappa(j);
            v(idx) = scale * (std::exp(z(idx)) - shifts_[static_cast<std::size_t>(j)]);
        }
        return {layout_, std::move(v)};
    }

    [[nodiscard]] Eigen::VectorXd to_z(const ThetaVector& theta) const {
        Eigen::VectorXd z(layout_.size());
        const int p = layout_.order;
        double scaled_sum = 0.0;
        for (int i = 0; i < p; ++i) scaled_sum += theta.alpha(i) / kAlphaCeiling;
        if (p > 0 && !(scaled_sum < 1.0)) throw DomainError("starting alphas must sum below 1 - 1e-6");
        for (int i = 0; i < p; ++i) {
            if (!(theta.alpha(i) > 0.0)) throw DomainError("starting alphas must be positive");
            z(i) = std::log(theta.alpha(i) / kAlphaCeiling) - std::log1p(-scaled_sum);
        }
        for (int k = 0; k < layout_.mean_dim; ++k) {
            const int idx = layout_.mean(k);
            const double v = theta.values()(idx);
            if (constant_ && !(v > 0.0)) throw DomainError("starting lambda must be positive");
            z(idx) = constant_ ? std::log(v) : v;
        }
        const double scale = constant_ ? theta.values()(layout_.mean(0)) : 1.0;
        for (int j = 0; j < layout_.interventions; ++j) {
            const double inner = theta.kappa(j) / scale + shifts_[static_cast<std::size_t>(j)];
            if (!(inner > 0.0)) throw DomainError("starting kappa is below the feasible range");
            z(layout_.kappa(j)) = std::log(inner);
        }
        return z;
    }

    // d theta / d z
    [[nodiscard]] Eigen::MatrixXd jacobian(const ThetaVector& theta) const {
        const int dim = layout_.size();
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
        const int p = layout_.order;
        for (int i = 0; i < p; ++i) {
            for (int k = 0; k < p; ++k) {
                jac(i, k) = (i == k ? theta.alpha(i) : 0.0) - theta.alpha(i) * theta.alpha(k) / kAlphaCeiling;
            }
        }
        for (int k = 0; k < layout_.mean_dim; ++k) {
            const int idx = layout_.mean(k);
            jac(idx, idx) = constant_ ? theta.values()(idx) : 1.0;
        }
        const double scale = constant_ ? theta.values()(layout_.mean(0)) : 1.0;
        for (int j = 0; j < layout_.interventions; ++j) {
            const int idx = layout_.kappa(j);
            jac(idx, idx) = theta.kappa(j) + scale * shifts_[static_cast<std::size_t>(j)];
            if (constant_) jac(idx, layout_.mean(0)) = theta.kappa(j);
        }
        return jac;
    }

private:
    ParameterLayout layout_;
    bool constant_;
    std::vector<double> shifts_;
};

struct Point {
    Eigen::VectorXd z;
    ThetaVector theta;
    LikelihoodEvaluation eval;
    Eigen::VectorXd grad_z;
};

std::optional<LikelihoodEvaluation> try_evaluate(const ThetaVector& theta, const CountSeries& series,
                                                 const ConditionalModel& model, DerivativeOrder order) {
    try {
        auto ev = evaluate_likelihood(theta, series, model, order);
        if (!std::isfinite(ev.loglik)) return std::nullopt;
        return ev;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Solves (B + mu I) d = g with the smallest mu >= mu_floor giving a positive definite system.
Eigen::VectorXd damped_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& g, double& mu) {
    const double scale = std::max(1.0, b.diagonal().cwiseAbs().maxCoeff());
    const auto dim = b.rows();
    for (int attempt = 0; attempt < 60; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(b + mu * Eigen::MatrixXd::Identity(dim, dim));
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd d = llt.solve(g);
            if (d.allFinite()) return d;
        }
        mu = mu == 0.0 ? 1e-10 * scale : mu * 10.0;
    }
    return g / scale;
}

std::vector<double> standard_errors(const ThetaVector& theta, const CountSeries& series,
                                    const ConditionalModel& model, const Eigen::MatrixXd& hessian) {
    Eigen::MatrixXd info;
    try {
        if (model.order == 1 && model.constant_mean() && model.profiles.empty()) {
            info = expected_information(theta, series.length(), {});
        } else {
            info = -hessian;
            require_well_conditioned(info);
        }
    } catch (const Error&) {
        return {};
    }
    const Eigen::MatrixXd cov = info.inverse();
    std::vector<double> out;
    for (Eigen::Index k = 0; k < cov.rows(); ++k) {
        if (!(cov(k, k) > 0.0)) return {};
        out.push_back(std::sqrt(cov(k, k)));
    }
    return out;
}

}  // namespace

ThetaVector cml_start(const CountSeries& series, const ConditionalModel& model) {
    const auto values = series.values();
    if (std::all_of(values.begin(), values.end(), [](Count v) { return v == 0; })) {
        throw DomainError("all observations are zero; the innovation mean is not identified");
    }
    const int p = model.order;
    const int j_count = static_cast<int>(model.profiles.size());
    std::vector<double> alphas(static_cast<std::size_t>(p), 0.2 / std::max(p, 1));
    std::vector<double> kappas(static_cast<std::size_t>(j_count), 0.0);
    double mean = 0.0;
    for (Count v : values) mean += static_cast<double>(v);
    mean /= static_cast<double>(values.size());
    double lambda = mean * 0.8;
    try {
        const auto cls = fit_cls(series, p, model.profiles);
        alphas = cls.alphas;
        lambda = cls.lambda;
        kappas = cls.kappas;
    } catch (const Error&) {
        // fallback start kept
    }
    for (auto& a : alphas) a = std::clamp(a, 1e-4, 0.99);
    for (int i = 0; i < p; ++i) {
        double others = 0.0;
        for (int k = 0; k < p; ++k) {
            if (k != i) others += alphas[static_cast<std::size_t>(k)];
        }
        auto& a = alphas[static_cast<std::size_t>(i)];
        a = std::max(1e-4, std::min(a, 0.99 * (1.0 - others)));
    }
    lambda = std::max(lambda, 1e-4);

    ParameterLayout layout = model.layout();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
    for (int i = 0; i < p; ++i) v(i) = alphas[static_cast<std::size_t>(i)];
    if (model.constant_mean()) {
        v(layout.mean(0)) = lambda;
    } else {
        const auto& x = *model.covariates;
        if (x.rows() < series.length()) throw ConfigError("covariate matrix has fewer rows than the series");
        const int rows = series.length() - p;
        Eigen::MatrixXd design(rows, x.cols());
        Eigen::VectorXd target(rows);
        for (int r = 0; r < rows; ++r) {
            const int t = p + 1 + r;
            double rest = static_cast<double>(series.at(t));
            for (int i = 0; i < p; ++i) {
                rest -= alphas[static_cast<std::size_t>(i)] * static_cast<double>(series.at(t - 1 - i));
            }
            for (int j = 0; j < j_count; ++j) {
                const auto k = static_cast<std::size_t>(j);
                rest -= std::max(0.0, kappas[k]) * decay_weight(model.profiles[k], t);
            }
            target(r) = std::log(std::max(rest, 0.5));
            design.row(r) = x.row(t - 1);
        }
        v.segment(layout.mean(0), layout.mean_dim) = design.colPivHouseholderQr().solve(target);
    }
    ThetaVector start(layout, v);
    // keep kappa inside the shifted-log domain used by the optimizer
    for (int j = 0; j < j_count; ++j) {
        const auto& prof = model.profiles[static_cast<std::size_t>(j)];
        double room = std::numeric_limits<double>::infinity();
        for (int t = std::max(prof.tau, p + 1); t <= series.length(); ++t) {
            const double w = decay_weight(prof, t);
            if (w > 0.0) room = std::min(room, innovation_mean(start, model, t) / w);
        }
        if (!std::isfinite(room)) room = 1.0;
        start.values()(layout.kappa(j)) = std::max(kappas[static_cast<std::size_t>(j)], -0.25 * room / j_count);
    }
    return start;
}

CmlFit fit_cml(const CountSeries& series, const ConditionalModel& model, const CmlOptions& options) {
    if (model.order < 0) throw ConfigError("order must be nonnegative");
    if (series.length() <= model.order + 1) throw ConfigError("series too short for the model order");
    const ThetaVector start = options.start ? *options.start : cml_start(series, model);
    if (start.layout() != model.layout()) throw ConfigError("starting point does not match the model layout");
    const Reparametrization map(start, series, model);

    const Eigen::VectorXd z0 = map.to_z(start);
    const ThetaVector theta0 = map.to_theta(z0);
    auto initial = try_evaluate(theta0, series, model, DerivativeOrder::kHessian);
    if (!initial) throw DomainError("starting point is infeasible");
    Point cur{z0, theta0, std::move(*initial), {}};
    Eigen::MatrixXd jac = map.jacobian(cur.theta);
    cur.grad_z = jac.transpose() * cur.eval.gradient;

    CmlFit fit{cur.theta, cur.eval.loglik, cur.eval.loglik, {}, false, 0, sup_norm(cur.grad_z), {cur.eval.loglik}};
    double mu = 0.0;
    while (true) {
        if (sup_norm(cur.grad_z) < options.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        if (fit.iterations >= options.max_iterations) break;

        const Eigen::MatrixXd b = jac.transpose() * (-cur.eval.hessian) * jac;
        bool accepted = false;
        // Below the noise floor of the summed log-likelihood the Armijo test is
        // meaningless; accept a full Newton step if it reduces the gradient instead.
        const double noise = kRoundoff * (1.0 + std::abs(cur.eval.loglik));
        {
            double probe_mu = 0.0;
            const Eigen::VectorXd d = damped_solve(b, cur.grad_z, probe_mu);
            if (probe_mu == 0.0 && 0.5 * cur.grad_z.dot(d) < noise) {
                const Eigen::VectorXd z = cur.z + d;
                const ThetaVector theta = map.to_theta(z);
                if (auto trial = try_evaluate(theta, series, model, DerivativeOrder::kHessian);
                    trial && trial->loglik >= cur.eval.loglik - noise) {
                    const Eigen::MatrixXd trial_jac = map.jacobian(theta);
                    const Eigen::VectorXd trial_grad = trial_jac.transpose() * trial->gradient;
                    if (sup_norm(trial_grad) < sup_norm(cur.grad_z)) {
                        cur.z = z;
                        cur.theta = theta;
                        cur.eval = std::move(*trial);
                        jac = trial_jac;
                        cur.grad_z = trial_grad;
                        accepted = true;
                    }
                }
            }
        }
        for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
            Eigen::VectorXd d = damped_solve(b, cur.grad_z, mu);
            if (const double big = sup_norm(d); big > kMaxStep) d *= kMaxStep / big;
            const double slope = cur.grad_z.dot(d);
            if (!(slope > 0.0)) {
                mu = mu == 0.0 ? 1e-6 : mu * 100.0;
                continue;
            }
            for (double step = 1.0; step > 1e-12; step *= 0.5) {
                const Eigen::VectorXd z = cur.z + step * d;
                const ThetaVector theta = map.to_theta(z);
                auto trial = try_evaluate(theta, series, model, DerivativeOrder::kValue);
                if (!trial) continue;
                bool take = trial->loglik >= cur.eval.loglik + kArmijo * step * slope;
                LikelihoodEvaluation full;
                if (!take && trial->loglik >= cur.eval.loglik) {
                    // roundoff regime: accept if the gradient still shrinks
                    full = evaluate_likelihood(theta, series, model, DerivativeOrder::kHessian);
                    take = sup_norm(map.jacobian(theta).transpose() * full.gradient) < sup_norm(cur.grad_z);
                    if (!take) break;
                } else if (take) {
                    full = evaluate_likelihood(theta, series, model, DerivativeOrder::kHessian);
                }
                if (!take) continue;
                cur.z = z;
                cur.theta = theta;
                cur.eval = std::move(full);
                jac = map.jacobian(cur.theta);
                cur.grad_z = jac.transpose() * cur.eval.gradient;
                accepted = true;
                mu = step == 1.0 ? mu * 0.1 : mu;
                if (mu < 1e-12) mu = 0.0;
                break;
            }
            if (!accepted) mu = mu == 0.0 ? 1e-4 * std::max(1.0, b.diagonal().cwiseAbs().maxCoeff()) : mu * 100.0;
        }
        if (!accepted) break;
        ++fit.iterations;
        fit.loglik_trace.push_back(cur.eval.loglik);
        // give up on a boundary drift that no longer moves the likelihood
        if (fit.loglik_trace.size() > kStallWindow) {
            const double then = fit.loglik_trace[fit.loglik_trace.size() - 1 - kStallWindow];
            if (cur.eval.loglik - then < noise) break;
        }
    }
    fit.theta = cur.theta;
    fit.loglik = cur.eval.loglik;
    fit.gradient_norm = sup_norm(cur.grad_z);
    fit.std_errors = standard_errors(cur.theta, series, model, cur.eval.hessian);
    return fit;
}

}  // namespace inar
