#pragma once

#include "inar/likelihood.hpp"
#include "inar/series.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace inar {

struct CmlOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;   ///< sup-norm in the transformed coordinates
    /// Starting point; the CLS-based start is used when empty.
    std::optional<ThetaVector> start;
};

struct CmlFit {
    ThetaVector theta;
    double loglik = 0;
    double start_loglik = 0;
    /// Standard errors in theta order; empty when the information is not invertible.
    std::vector<double> std_errors;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0;           ///< final sup-norm in transformed coordinates
    std::vector<double> loglik_trace;   ///< log-likelihood after each accepted step, starting point first
};

/// Conditional maximum likelihood fit of the (contaminated) INAR(p) model.
///
/// Optimizes over an unconstrained reparametrization that keeps every
/// evaluation feasible: a scaled logistic map for the alphas (sum below
/// 1 - 1e-6), log for a constant lambda, identity for betas and a shifted
/// log for each kappa. Steps are damped Newton steps on the transformed
/// problem with Armijo backtracking. The log-likelihood never decreases by more
/// than 1e-12 (1 + |loglik|), its rounding noise.
/// Hitting the iteration cap returns the current point with `converged` false.
///
/// Throws DomainError for an all-zero series (the innovation mean is not identified).
[[nodiscard]] CmlFit fit_cml(const CountSeries& series, const ConditionalModel& model, const CmlOptions& options = {});

/// Clipped CLS-based starting point used by fit_cml.
[[nodiscard]] ThetaVector cml_start(const CountSeries& series, const ConditionalModel& model);

}  // namespace inar
