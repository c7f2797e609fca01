#include "inar/cls.hpp"

#include "inar/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace inar {
namespace {

std::string profile_column_name(const InterventionProfile& profile) {
    std::ostringstream name;
    name << "iv(tau=" << profile.tau << ",delta=" << profile.delta << ")";
    return name.str();
}

// Names of columns whose component orthogonal to the preceding columns is
// negligible relative to their own norm (two-pass Gram-Schmidt).
std::vector<std::string> dependent_columns(const Eigen::MatrixXd& design, const std::vector<std::string>& names) {
    constexpr double kRelTol = 1e-10;
    std::vector<Eigen::VectorXd> basis;
    std::vector<std::string> offending;
    for (Eigen::Index k = 0; k < design.cols(); ++k) {
        Eigen::VectorXd v = design.col(k);
        const double norm = v.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) v -= q.dot(v) * q;
        }
        const double rest = v.norm();
        if (norm == 0.0 || rest <= kRelTol * norm) {
            offending.push_back(names[static_cast<std::size_t>(k)]);
        } else {
            basis.push_back(v / rest);
        }
    }
    return offending;
}

bool outside_region(const std::vector<double>& alphas, double lambda) {
    double sum = 0.0;
    for (double a : alphas) {
        if (a < 0.0 || a >= 1.0) return true;
        sum += a;
    }
    return sum >= 1.0 || lambda <= 0.0;
}

}  // namespace

ClsDesign build_cls_design(const CountSeries& series, int order, const std::vector<InterventionProfile>& profiles) {
    if (order < 0) throw DomainError("order must be nonnegative");
    const int n = series.length();
    const int rows = n - order;
    const int cols = 1 + order + static_cast<int>(profiles.size());
    if (rows < cols || n <= order + 1 + static_cast<int>(profiles.size())) {
        throw ConfigError("series of length " + std::to_string(n) + " is too short for " + std::to_string(cols) +
                          " least-squares columns");
    }
    for (const auto& profile : profiles) {
        validate_profile(profile);
        if (profile.tau < order + 1 || profile.tau > n) {
            throw DomainError("intervention time " + std::to_string(profile.tau) + " outside the estimation window [" +
                              std::to_string(order + 1) + ", " + std::to_string(n) + "]");
        }
    }

    ClsDesign out;
    out.order = order;
    out.response.resize(rows);
    out.design.resize(rows, cols);
    out.column_names.push_back("intercept");
    for (int i = 1; i <= order; ++i) out.column_names.push_back("lag" + std::to_string(i));
    for (const auto& profile : profiles) out.column_names.push_back(profile_column_name(profile));

    for (int r = 0; r < rows; ++r) {
        const int t = order + 1 + r;
        out.response(r) = static_cast<double>(series.at(t));
        out.design(r, 0) = 1.0;
        for (int i = 1; i <= order; ++i) out.design(r, i) = static_cast<double>(series.at(t - i));
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            out.design(r, 1 + order + static_cast<int>(j)) = decay_weight(profiles[j], t);
        }
    }

    if (auto bad = dependent_columns(out.design, out.column_names); !bad.empty()) {
        std::string list;
        for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
        throw RankError("least-squares design is rank deficient; dependent columns: " + list, std::move(bad));
    }
    return out;
}

Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * response;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-10) {
        return ldlt.solve(rhs);
    }
    return design.colPivHouseholderQr().solve(response);
}

ClsFit fit_cls(const CountSeries& series, int order, const std::vector<InterventionProfile>& profiles) {
    const auto design = build_cls_design(series, order, profiles);
    const Eigen::VectorXd coef = solve_least_squares(design.design, design.response);
    const Eigen::VectorXd resid = design.response - design.design * coef;

    ClsFit fit;
    fit.lambda = coef(0);
    for (int i = 1; i <= order; ++i) fit.alphas.push_back(coef(i));
    for (std::size_t j = 0; j < profiles.size(); ++j) fit.kappas.push_back(coef(1 + order + static_cast<int>(j)));
    fit.rss = resid.squaredNorm();
    fit.n_effective = static_cast<int>(design.response.size());
    fit.outside_stationary_region = outside_region(fit.alphas, fit.lambda);
    return fit;
}

double f_from_rss(double rss_null, double rss_alt, int n, int order) {
    const int dof = n - order - 2;
    if (dof <= 0) throw ConfigError("F statistic needs n - p - 2 > 0");
    if (rss_alt <= 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, rss_null - rss_alt) / (rss_alt / dof);
}

FStatisticScanner::FStatisticScanner(const CountSeries& series, int order)
    : n_(series.length()), order_(order), design_(build_cls_design(series, order, {})) {
    if (n_ - order_ - 2 <= 0) throw ConfigError("F statistic needs n - p - 2 > 0");
    const Eigen::VectorXd coef = solve_least_squares(design_.design, design_.response);
    residual_ = design_.response - design_.design * coef;
    gram_.compute(design_.design.transpose() * design_.design);
    response_norm2_ = design_.response.squaredNorm();

    null_fit_.lambda = coef(0);
    for (int i = 1; i <= order_; ++i) null_fit_.alphas.push_back(coef(i));
    null_fit_.rss = residual_.squaredNorm();
    null_fit_.n_effective = static_cast<int>(design_.response.size());
    null_fit_.outside_stationary_region = outside_region(null_fit_.alphas, null_fit_.lambda);
}

FCell FStatisticScanner::evaluate(const InterventionProfile& profile) const {
    validate_profile(profile);
    if (profile.tau < order_ + 1 || profile.tau > n_) {
        throw DomainError("intervention time " + std::to_string(profile.tau) + " outside [" +
                          std::to_string(order_ + 1) + ", " + std::to_string(n_) + "]");
    }
    const Eigen::Index cols = design_.design.cols();
    Eigen::VectorXd cross = Eigen::VectorXd::Zero(cols);
    double xx = 0.0;
    double xr = 0.0;
    for (int t = profile.tau; t <= n_; ++t) {
        const double w = decay_weight(profile, t);
        if (w == 0.0) continue;
        const Eigen::Index r = t - order_ - 1;
        cross += w * design_.design.row(r).transpose();
        xx += w * w;
        xr += w * residual_(r);
    }
    const double leverage = cross.dot(gram_.solve(cross));
    const double q = xx - leverage;
    if (!(q > 1e-10 * xx)) {
        throw RankError("intervention column " + profile_column_name(profile) + " is collinear with the null design",
                        {profile_column_name(profile)});
    }
    FCell cell;
    cell.kappa_hat = xr / q;
    cell.rss_alt = std::max(0.0, null_fit_.rss - xr * xr / q);
    if (cell.rss_alt <= 1e-14 * response_norm2_) {
        cell.degenerate = true;
        cell.statistic = std::numeric_limits<double>::infinity();
    } else {
        cell.statistic = f_from_rss(null_fit_.rss, cell.rss_alt, n_, order_);
    }
    return cell;
}

double f_statistic(const CountSeries& series, int order, int tau, double delta) {
    return FStatisticScanner(series, order).evaluate({tau, delta}).statistic;
}

}  // namespace inar
