#include "inar/likelihood.hpp"

#include "inar/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace inar {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kFactorialTable = 4096;

const std::array<double, kFactorialTable>& factorial_table() {
    static const auto table = [] {
        std::array<double, kFactorialTable> t{};
        t[0] = 0.0;
        for (std::size_t k = 1; k < kFactorialTable; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
        return t;
    }();
    return table;
}

double log_choose(Count n, Count k) { return log_factorial(n) - log_factorial(k) - log_factorial(n - k); }

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// Log pmf of S = sum_i alpha_i o lag_i at 0..cap, written into `out`.
void thinning_log_pmf(std::span<const Count> lags, std::span<const double> alphas, Count cap,
                      std::vector<double>& out, std::vector<double>& scratch) {
    out.assign(static_cast<std::size_t>(cap + 1), kNegInf);
    out[0] = 0.0;
    Count support = 0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const Count top = std::min(lags[i], cap);
        if (lags[i] == 0 || alphas[i] == 0.0) continue;
        scratch.assign(static_cast<std::size_t>(top + 1), kNegInf);
        for (Count m = 0; m <= top; ++m) scratch[static_cast<std::size_t>(m)] = binomial_log_pmf(m, lags[i], alphas[i]);
        const Count new_support = std::min(cap, support + top);
        for (Count k = new_support; k >= 0; --k) {
            double acc = kNegInf;
            for (Count m = std::max<Count>(0, k - support); m <= std::min(k, top); ++m) {
                acc = log_add(acc, out[static_cast<std::size_t>(k - m)] + scratch[static_cast<std::size_t>(m)]);
            }
            out[static_cast<std::size_t>(k)] = acc;
        }
        support = new_support;
    }
}

double convolve_with_poisson(const std::vector<double>& thin, Count y, double log_mean, double mean) {
    if (y < 0) return kNegInf;
    double peak = kNegInf;
    const Count top = std::min<Count>(y, static_cast<Count>(thin.size()) - 1);
    // two passes: max, then scaled sum
    for (Count k = 0; k <= top; ++k) {
        const double v = thin[static_cast<std::size_t>(k)];
        if (v == kNegInf) continue;
        peak = std::max(peak, v + static_cast<double>(y - k) * log_mean - log_factorial(y - k));
    }
    if (peak == kNegInf) return kNegInf;
    double sum = 0.0;
    for (Count k = 0; k <= top; ++k) {
        const double v = thin[static_cast<std::size_t>(k)];
        if (v == kNegInf) continue;
        sum += std::exp(v + static_cast<double>(y - k) * log_mean - log_factorial(y - k) - peak);
    }
    return peak + std::log(sum) - mean;
}

// Evaluates log p(y - c | lags - shift) for the shifts needed by the derivatives.
class ShiftedProbabilities {
public:
    ShiftedProbabilities(Count y, std::span<const Count> lags, std::span<const double> alphas, double mean)
        : y_(y), lags_(lags.begin(), lags.end()), alphas_(alphas), mean_(mean), log_mean_(std::log(mean)) {}

    // Fills out[c] = log p(y - c | lags - shift) for c = 0..max_c.
    void evaluate(std::span<const Count> shift, int max_c, std::array<double, 3>& out) {
        shifted_.assign(lags_.begin(), lags_.end());
        for (std::size_t i = 0; i < shift.size(); ++i) shifted_[i] -= shift[i];
        out.fill(kNegInf);
        for (Count v : shifted_) {
            if (v < 0) return;
        }
        const Count cap = y_;
        if (cap < 0) return;
        thinning_log_pmf(shifted_, alphas_, cap, thin_, scratch_);
        for (int c = 0; c <= max_c; ++c) {
            out[static_cast<std::size_t>(c)] = convolve_with_poisson(thin_, y_ - c, log_mean_, mean_);
        }
    }

private:
    Count y_;
    std::vector<Count> lags_;
    std::span<const double> alphas_;
    double mean_;
    double log_mean_;
    std::vector<Count> shifted_;
    std::vector<double> thin_;
    std::vector<double> scratch_;
};

void check_transition_args(Count y, std::span<const Count> lags, std::span<const double> alphas, double mean) {
    if (lags.size() != alphas.size()) throw DomainError("lag and thinning-probability counts differ");
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw DomainError("transition mean must be positive and finite, got " + std::to_string(mean));
    }
    if (y < 0) throw DomainError("count must be nonnegative");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 0) throw DomainError("lagged count must be nonnegative");
        if (!(alphas[i] >= 0.0 && alphas[i] < 1.0)) throw DomainError("thinning probability must lie in [0, 1)");
    }
}

}  // namespace

double log_factorial(Count k) {
    if (k < 0) throw DomainError("factorial of a negative integer");
    if (static_cast<std::size_t>(k) < kFactorialTable) return factorial_table()[static_cast<std::size_t>(k)];
    return std::lgamma(static_cast<double>(k) + 1.0);
}

double poisson_log_pmf(Count y, double mean) {
    if (y < 0) return kNegInf;
    if (mean == 0.0) return y == 0 ? 0.0 : kNegInf;
    return static_cast<double>(y) * std::log(mean) - mean - log_factorial(y);
}

double binomial_log_pmf(Count k, Count trials, double prob) {
    if (k < 0 || k > trials) return kNegInf;
    if (prob == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (prob == 1.0) return k == trials ? 0.0 : kNegInf;
    return log_choose(trials, k) + static_cast<double>(k) * std::log(prob) +
           static_cast<double>(trials - k) * std::log1p(-prob);
}

double transition_log_prob(Count y, std::span<const Count> lags, std::span<const double> alphas, double mean) {
    check_transition_args(y, lags, alphas, mean);
    ShiftedProbabilities probs(y, lags, alphas, mean);
    std::array<double, 3> out{};
    const std::vector<Count> none(lags.size(), 0);
    probs.evaluate(none, 0, out);
    return out[0];
}

std::vector<double> transition_log_pmf_row(Count lag, double alpha, double mean, Count y_max) {
    const std::array<Count, 1> lags{lag};
    const std::array<double, 1> alphas{alpha};
    check_transition_args(0, lags, alphas, mean);
    std::vector<double> thin;
    std::vector<double> scratch;
    thinning_log_pmf(lags, alphas, y_max, thin, scratch);
    std::vector<double> out(static_cast<std::size_t>(y_max + 1));
    const double log_mean = std::log(mean);
    for (Count y = 0; y <= y_max; ++y) {
        out[static_cast<std::size_t>(y)] = convolve_with_poisson(thin, y, log_mean, mean);
    }
    return out;
}

TransitionDerivatives transition_derivatives(Count y, std::span<const Count> lags, std::span<const double> alphas,
                                             double mean, DerivativeOrder order) {
    check_transition_args(y, lags, alphas, mean);
    const auto p = static_cast<int>(lags.size());
    ShiftedProbabilities probs(y, lags, alphas, mean);
    std::vector<Count> shift(lags.size(), 0);
    std::array<double, 3> base{};
    const int max_c = order == DerivativeOrder::kHessian ? 2 : order == DerivativeOrder::kGradient ? 1 : 0;
    probs.evaluate(shift, max_c, base);

    TransitionDerivatives d;
    d.log_prob = base[0];
    if (order == DerivativeOrder::kValue) return d;

    const double lp = base[0];
    const double r1 = std::exp(base[1] - lp);
    d.d_mean = r1 - 1.0;
    d.d_alpha = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i) {
        if (lags[static_cast<std::size_t>(i)] == 0) continue;
        shift.assign(lags.size(), 0);
        shift[static_cast<std::size_t>(i)] = 1;
        std::array<double, 3> s{};
        probs.evaluate(shift, max_c, s);
        a(i) = std::exp(s[1] - lp);
        b(i) = max_c >= 2 ? std::exp(s[2] - lp) : 0.0;
        const double n_i = static_cast<double>(lags[static_cast<std::size_t>(i)]);
        d.d_alpha(i) = n_i * (a(i) - 1.0) / (1.0 - alphas[static_cast<std::size_t>(i)]);
    }
    if (order == DerivativeOrder::kGradient) return d;

    const double r2 = std::exp(base[2] - lp);
    d.d2_mean = r2 - r1 * r1;
    d.d2_alpha = Eigen::MatrixXd::Zero(p, p);
    d.d_alpha_mean = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i) {
        const Count ni = lags[static_cast<std::size_t>(i)];
        if (ni == 0) continue;
        const double n_i = static_cast<double>(ni);
        const double s_i = 1.0 - alphas[static_cast<std::size_t>(i)];
        d.d_alpha_mean(i) = n_i / s_i * (b(i) - r1 * a(i));

        shift.assign(lags.size(), 0);
        shift[static_cast<std::size_t>(i)] = 2;
        std::array<double, 3> s{};
        probs.evaluate(shift, 2, s);
        const double c = std::exp(s[2] - lp);
        d.d2_alpha(i, i) = n_i / (s_i * s_i) * (2.0 * a(i) - 1.0 + (n_i - 1.0) * c - n_i * a(i) * a(i));

        for (int j = i + 1; j < p; ++j) {
            const Count nj = lags[static_cast<std::size_t>(j)];
            if (nj == 0) continue;
            const double s_j = 1.0 - alphas[static_cast<std::size_t>(j)];
            shift.assign(lags.size(), 0);
            shift[static_cast<std::size_t>(i)] = 1;
            shift[static_cast<std::size_t>(j)] = 1;
            probs.evaluate(shift, 2, s);
            const double dij = std::exp(s[2] - lp);
            const double v = n_i * static_cast<double>(nj) / (s_i * s_j) * (dij - a(i) * a(j));
            d.d2_alpha(i, j) = v;
            d.d2_alpha(j, i) = v;
        }
    }
    return d;
}

ParameterLayout ConditionalModel::layout() const {
    return {order, constant_mean() ? 1 : static_cast<int>(covariates->cols()), static_cast<int>(profiles.size())};
}

ConditionalModel ConditionalModel::with_profiles(std::vector<InterventionProfile> replacement) const {
    ConditionalModel out = *this;
    out.profiles = std::move(replacement);
    return out;
}

ThetaVector::ThetaVector(ParameterLayout layout, Eigen::VectorXd values) : layout_(layout), values_(std::move(values)) {
    if (layout_.order < 0 || layout_.mean_dim < 1 || layout_.interventions < 0) {
        throw ConfigError("invalid parameter layout");
    }
    if (values_.size() != layout_.size()) {
        throw ConfigError("parameter vector has " + std::to_string(values_.size()) + " entries, layout needs " +
                          std::to_string(layout_.size()));
    }
}

ThetaVector ThetaVector::constant(std::vector<double> alphas, double lambda, std::vector<double> kappas) {
    const ParameterLayout layout{static_cast<int>(alphas.size()), 1, static_cast<int>(kappas.size())};
    Eigen::VectorXd v(layout.size());
    for (int i = 0; i < layout.order; ++i) v(i) = alphas[static_cast<std::size_t>(i)];
    v(layout.mean(0)) = lambda;
    for (int j = 0; j < layout.interventions; ++j) v(layout.kappa(j)) = kappas[static_cast<std::size_t>(j)];
    return {layout, std::move(v)};
}

ThetaVector ThetaVector::log_linear(std::vector<double> alphas, const Eigen::VectorXd& betas,
                                    std::vector<double> kappas) {
    const ParameterLayout layout{static_cast<int>(alphas.size()), static_cast<int>(betas.size()),
                                 static_cast<int>(kappas.size())};
    Eigen::VectorXd v(layout.size());
    for (int i = 0; i < layout.order; ++i) v(i) = alphas[static_cast<std::size_t>(i)];
    v.segment(layout.mean(0), layout.mean_dim) = betas;
    for (int j = 0; j < layout.interventions; ++j) v(layout.kappa(j)) = kappas[static_cast<std::size_t>(j)];
    return {layout, std::move(v)};
}

std::vector<double> ThetaVector::alphas() const {
    std::vector<double> out(static_cast<std::size_t>(layout_.order));
    for (int i = 0; i < layout_.order; ++i) out[static_cast<std::size_t>(i)] = alpha(i);
    return out;
}

std::vector<double> ThetaVector::kappas() const {
    std::vector<double> out(static_cast<std::size_t>(layout_.interventions));
    for (int j = 0; j < layout_.interventions; ++j) out[static_cast<std::size_t>(j)] = kappa(j);
    return out;
}

ThetaVector ThetaVector::with_zero_kappas(int extra) const {
    ParameterLayout layout = layout_;
    layout.interventions += extra;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
    v.head(values_.size()) = values_;
    return {layout, std::move(v)};
}

double innovation_mean(const ThetaVector& theta, const ConditionalModel& model, int t) {
    if (model.constant_mean()) return theta.values()(theta.layout().mean(0));
    const auto& x = *model.covariates;
    if (t < 1 || t > x.rows()) {
        throw ConfigError("no covariate row for time " + std::to_string(t));
    }
    return std::exp(x.row(t - 1).dot(theta.mean_params()));
}

double transition_mean(const ThetaVector& theta, const ConditionalModel& model, int t) {
    double mean = innovation_mean(theta, model, t);
    for (std::size_t j = 0; j < model.profiles.size(); ++j) {
        const double w = decay_weight(model.profiles[j], t);
        if (w != 0.0) mean += theta.kappa(static_cast<int>(j)) * w;
    }
    return mean;
}

void check_feasible(const ThetaVector& theta, const CountSeries& series, const ConditionalModel& model) {
    if (theta.layout() != model.layout()) throw ConfigError("parameter layout does not match the model");
    double sum = 0.0;
    for (int i = 0; i < model.order; ++i) {
        const double a = theta.alpha(i);
        if (!(a >= 0.0 && a < 1.0)) {
            throw DomainError("alpha_" + std::to_string(i + 1) + " = " + std::to_string(a) + " outside [0, 1)");
        }
        sum += a;
    }
    if (!(sum < 1.0)) throw DomainError("sum of alphas must be below 1");
    if (!model.constant_mean() && model.covariates->rows() < series.length()) {
        throw ConfigError("covariate matrix has fewer rows than the series");
    }
    for (int t = model.order + 1; t <= series.length(); ++t) {
        const double mean = transition_mean(theta, model, t);
        if (!(mean > 0.0) || !std::isfinite(mean)) {
            throw DomainError("transition mean is not positive at t = " + std::to_string(t));
        }
    }
}

LikelihoodEvaluation evaluate_likelihood(const ThetaVector& theta, const CountSeries& series,
                                         const ConditionalModel& model, DerivativeOrder order) {
    check_feasible(theta, series, model);
    const ParameterLayout layout = theta.layout();
    const int p = model.order;
    const int n = series.length();
    const int dim = layout.size();
    const int tail = layout.mean_dim + layout.interventions;  // mean-dependent parameters
    const auto alphas = theta.alphas();
    const auto y = series.values();

    LikelihoodEvaluation out;
    if (order != DerivativeOrder::kValue) out.gradient = Eigen::VectorXd::Zero(dim);
    if (order == DerivativeOrder::kHessian) out.hessian = Eigen::MatrixXd::Zero(dim, dim);

    std::vector<Count> lags(static_cast<std::size_t>(p));
    Eigen::VectorXd dmean(tail);
    double carry = 0.0;
    for (int t = p + 1; t <= n; ++t) {
        for (int i = 0; i < p; ++i) lags[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(t - 2 - i)];
        const double lambda_t = innovation_mean(theta, model, t);
        const double mean = transition_mean(theta, model, t);
        const auto d = transition_derivatives(y[static_cast<std::size_t>(t - 1)], lags, alphas, mean, order);
        // Neumaier summation: optimizer acceptance near the optimum relies on tiny differences
        const double next = out.loglik + d.log_prob;
        carry += std::abs(out.loglik) >= std::abs(d.log_prob) ? (out.loglik - next) + d.log_prob
                                                               : (d.log_prob - next) + out.loglik;
        out.loglik = next;
        if (order == DerivativeOrder::kValue) continue;

        if (model.constant_mean()) {
            dmean(0) = 1.0;
        } else {
            dmean.head(layout.mean_dim) = lambda_t * model.covariates->row(t - 1).transpose();
        }
        for (int j = 0; j < layout.interventions; ++j) {
            dmean(layout.mean_dim + j) = decay_weight(model.profiles[static_cast<std::size_t>(j)], t);
        }
        out.gradient.head(p) += d.d_alpha;
        out.gradient.tail(tail) += d.d_mean * dmean;
        if (order != DerivativeOrder::kHessian) continue;

        out.hessian.topLeftCorner(p, p) += d.d2_alpha;
        const Eigen::MatrixXd cross = d.d_alpha_mean * dmean.transpose();
        out.hessian.topRightCorner(p, tail) += cross;
        out.hessian.bottomLeftCorner(tail, p) += cross.transpose();
        out.hessian.bottomRightCorner(tail, tail) += d.d2_mean * dmean * dmean.transpose();
        if (!model.constant_mean()) {
            const auto x = model.covariates->row(t - 1);
            out.hessian.block(p, p, layout.mean_dim, layout.mean_dim) += d.d_mean * lambda_t * x.transpose() * x;
        }
    }
    out.loglik += carry;
    return out;
}

double conditional_loglik(const ThetaVector& theta, const CountSeries& series, const ConditionalModel& model) {
    return evaluate_likelihood(theta, series, model, DerivativeOrder::kValue).loglik;
}

Eigen::VectorXd score_vector(const ThetaVector& theta, const CountSeries& series, const ConditionalModel& model) {
    return evaluate_likelihood(theta, series, model, DerivativeOrder::kGradient).gradient;
}

Eigen::MatrixXd hessian_matrix(const ThetaVector& theta, const CountSeries& series, const ConditionalModel& model) {
    return evaluate_likelihood(theta, series, model, DerivativeOrder::kHessian).hessian;
}

}  // namespace inar
