#pragma once

#include "inar/model.hpp"
#include "inar/random.hpp"
#include "inar/series.hpp"

#include <vector>

namespace inar {

/// alpha o count: the number of successes in `count` Bernoulli(alpha) trials.
[[nodiscard]] Count binomial_thin(Count count, double alpha, RandomStream& rng);

struct SimulationOptions {
    /// Steps discarded before t = 1. Interventions are indexed on retained time.
    int burn_in = 500;
    /// Values of Y_{0}, Y_{-1}, ... (most recent first) before the first step; zeros when empty.
    std::vector<Count> initial_state;
    /// Covariate row used for the first simulated step is `covariate_offset + 1`.
    int covariate_offset = 0;
};

/// Simulates Y_t = sum_i alpha_i o Y_{t-i} + e_t + sum_j U_{t,j} for t = 1..n.
///
/// Each random component draws from its own substream of `rng` (innovations,
/// one per thinning lag, one per intervention), so an intervention with
/// kappa = 0 leaves the path bitwise identical to the clean one.
[[nodiscard]] CountSeries simulate_contaminated(const InarModel& model,
                                                const std::vector<Intervention>& interventions, int n,
                                                const SimulationOptions& options, const RandomStream& rng);

[[nodiscard]] inline CountSeries simulate(const InarModel& model, int n, const RandomStream& rng) {
    return simulate_contaminated(model, {}, n, SimulationOptions{}, rng);
}

}  // namespace inar
