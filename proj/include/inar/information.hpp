#pragma once

#include "inar/likelihood.hpp"

#include <Eigen/Dense>

#include <vector>

namespace inar {

/// Smallest m with P(X > m) <= tol for X ~ Poisson(mean), by direct tail summation.
[[nodiscard]] int truncation_point(double mean, double tol = 1e-15);

/// Per-transition expected negative second derivatives of log p(Y_t | Y_{t-1})
/// under the stationary INAR(1) law, with respect to (alpha, transition mean).
struct TransitionInformation {
    double alpha_alpha = 0;
    double alpha_mean = 0;
    double mean_mean = 0;
    int truncation = 0;   ///< m used for both the lag and the response sums
};

[[nodiscard]] TransitionInformation transition_information(double alpha, double lambda, int truncation);
[[nodiscard]] TransitionInformation transition_information(double alpha, double lambda, double tol = 1e-15);

/// The same expectations for one transition given the observed lag, with Y summed
/// up to lag + the Poisson(mean) truncation point. Needs no stationary law.
[[nodiscard]] TransitionInformation conditional_transition_information(Count lag, double alpha, double mean,
                                                                       double tol = 1e-15);

/// Expected conditional information for theta = (alpha, lambda, kappa_1..kappa_J) at kappa = 0.
///
/// INAR(1) with a constant mean only. Rows and columns follow ThetaVector's
/// layout. Throws UnsupportedError for other models and SingularityError
/// when the condition number exceeds 1e12.
[[nodiscard]] Eigen::MatrixXd expected_information(const ThetaVector& theta, int n,
                                                   const std::vector<InterventionProfile>& profiles,
                                                   double tol = 1e-15);

/// Same, with an explicit truncation point instead of a tail tolerance.
[[nodiscard]] Eigen::MatrixXd expected_information_truncated(const ThetaVector& theta, int n,
                                                             const std::vector<InterventionProfile>& profiles,
                                                             int truncation);

/// Throws SingularityError unless `m` is symmetric positive definite with condition number <= max_condition.
void require_well_conditioned(const Eigen::MatrixXd& m, double max_condition = 1e12);

}  // namespace inar
