#include "inar/simulate.hpp"

#include "inar/errors.hpp"

#include <deque>
#include <string>

namespace inar {
namespace {

constexpr std::uint64_t kInnovationStream = 1;
constexpr std::uint64_t kThinningStreamBase = 100;
constexpr std::uint64_t kInterventionStreamBase = 1000;

}  // namespace

Count binomial_thin(Count count, double alpha, RandomStream& rng) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("thinning probability must lie in [0, 1], got " + std::to_string(alpha));
    }
    if (count < 0) throw DomainError("cannot thin a negative count");
    if (alpha == 0.0) return 0;
    if (alpha == 1.0) return count;
    Count survivors = 0;
    for (Count k = 0; k < count; ++k) {
        if (rng.uniform() < alpha) ++survivors;
    }
    return survivors;
}

CountSeries simulate_contaminated(const InarModel& model, const std::vector<Intervention>& interventions,
                                  int n, const SimulationOptions& options, const RandomStream& rng) {
    if (n < 1) throw ConfigError("series length must be >= 1");
    if (options.burn_in < 0) throw ConfigError("burn-in must be nonnegative");
    if (options.covariate_offset < 0) throw ConfigError("covariate offset must be nonnegative");
    const int p = model.order();
    const int steps = options.burn_in + n;
    if (auto rows = model.mean().rows(); rows && *rows < options.covariate_offset + steps) {
        throw ConfigError("log-linear mean needs " + std::to_string(options.covariate_offset + steps) +
                          " covariate rows (offset + burn-in + n) but has " + std::to_string(*rows));
    }
    for (const auto& iv : interventions) {
        validate_profile(iv.profile());
        if (iv.tau > n) throw ConfigError("intervention time " + std::to_string(iv.tau) + " beyond series length");
        if (!(iv.kappa >= 0.0)) throw DomainError("simulated intervention size must be nonnegative");
    }
    if (!options.initial_state.empty() && static_cast<int>(options.initial_state.size()) != p) {
        throw ConfigError("initial state must hold exactly p values");
    }

    auto innovations = rng.substream(kInnovationStream);
    std::vector<RandomStream> thinning;
    for (int i = 0; i < p; ++i) thinning.push_back(rng.substream(kThinningStreamBase + static_cast<std::uint64_t>(i)));
    std::vector<RandomStream> effects;
    for (std::size_t j = 0; j < interventions.size(); ++j) {
        effects.push_back(rng.substream(kInterventionStreamBase + j));
    }

    // history[0] is Y_{t-1}
    std::deque<Count> history;
    if (options.initial_state.empty()) {
        history.assign(static_cast<std::size_t>(p), 0);
    } else {
        for (auto v : options.initial_state) {
            if (v < 0) throw DomainError("initial state must be nonnegative");
            history.push_back(v);
        }
    }

    const auto& alphas = model.alphas();
    std::vector<Count> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int step = 1; step <= steps; ++step) {
        Count y = 0;
        for (int i = 0; i < p; ++i) {
            y += binomial_thin(history[static_cast<std::size_t>(i)], alphas[static_cast<std::size_t>(i)],
                               thinning[static_cast<std::size_t>(i)]);
        }
        y += innovations.poisson(model.mean().at(options.covariate_offset + step));
        const int t = step - options.burn_in;
        if (t >= 1) {
            for (std::size_t j = 0; j < interventions.size(); ++j) {
                const double mean = intervention_mean(interventions[j], t);
                if (mean > 0.0) y += effects[j].poisson(mean);
            }
            out.push_back(y);
        }
        history.push_front(y);
        history.pop_back();
    }
    return CountSeries(std::move(out));
}

}  // namespace inar
