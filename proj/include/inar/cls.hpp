#pragma once

#include "inar/model.hpp"
#include "inar/series.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace inar {

/// Linear-model form of the conditional mean for rows t = p+1..n.
///
/// Columns are: intercept (lambda), lags 1..p, then one decay column per
/// intervention profile.
struct ClsDesign {
    Eigen::VectorXd response;
    Eigen::MatrixXd design;
    std::vector<std::string> column_names;
    int order = 0;
};

struct ClsFit {
    std::vector<double> alphas;
    double lambda = 0;
    std::vector<double> kappas;
    double rss = 0;
    int n_effective = 0;                  ///< residual rows, n - p
    bool outside_stationary_region = false;  ///< some alpha outside [0,1), sum >= 1, or lambda <= 0
};

/// Throws RankError naming every column that is (numerically) a linear
/// combination of the preceding ones.
[[nodiscard]] ClsDesign build_cls_design(const CountSeries& series, int order,
                                         const std::vector<InterventionProfile>& profiles);

/// Unconstrained least-squares fit of the contaminated INAR(p) conditional mean.
[[nodiscard]] ClsFit fit_cls(const CountSeries& series, int order,
                             const std::vector<InterventionProfile>& profiles = {});

/// Least-squares solve used by fit_cls: Cholesky on the normal equations,
/// falling back to column-pivoted QR when the reciprocal condition estimate is below 1e-10.
[[nodiscard]] Eigen::VectorXd solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// (RSS0 - RSS1) / (RSS1 / (n - p - 2)); +inf when RSS1 is zero.
[[nodiscard]] double f_from_rss(double rss_null, double rss_alt, int n, int order);

/// One (tau, delta) cell of the F scan.
struct FCell {
    double statistic = 0;   ///< +inf when the alternative fit is exact
    double kappa_hat = 0;   ///< CLS size estimate under the alternative
    double rss_alt = 0;
    bool degenerate = false;
};

/// Evaluates F for many intervention profiles against one null fit.
///
/// The null design is factorized once; each profile adds a single column,
/// so the alternative RSS follows from the partitioned (Frisch-Waugh) update
/// RSS1 = RSS0 - (x'r0)^2 / x'Mx with M the null residual projector.
class FStatisticScanner {
public:
    FStatisticScanner(const CountSeries& series, int order);

    [[nodiscard]] const ClsFit& null_fit() const noexcept { return null_fit_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int length() const noexcept { return n_; }

    /// Throws DomainError for tau outside [p+1, n] and RankError when the
    /// intervention column lies in the span of the null design.
    [[nodiscard]] FCell evaluate(const InterventionProfile& profile) const;

private:
    int n_;
    int order_;
    ClsDesign design_;
    Eigen::LLT<Eigen::MatrixXd> gram_;
    Eigen::VectorXd residual_;
    double response_norm2_ = 0;
    ClsFit null_fit_;
};

/// F-type statistic for one intervention of type delta at time tau.
[[nodiscard]] double f_statistic(const CountSeries& series, int order, int tau, double delta);

}  // namespace inar
