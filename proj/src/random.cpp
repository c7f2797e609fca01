#include "inar/random.hpp"

#include <cmath>
#include "inar/errors.hpp"

namespace inar {
namespace {

std::mt19937_64 seeded_engine(const std::vector<std::uint64_t>& key) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * key.size() + 1);
    words.push_back(static_cast<std::uint32_t>(key.size()));
    for (auto k : key) {
        words.push_back(static_cast<std::uint32_t>(k & 0xffffffffULL));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

// Inversion by sequential search; used below the rejection threshold.
std::int64_t poisson_inversion(RandomStream& rng, double mean) {
    const double u = rng.uniform();
    std::int64_t k = 0;
    double pmf = std::exp(-mean);
    double cdf = pmf;
    while (u > cdf) {
        ++k;
        pmf *= mean / static_cast<double>(k);
        if (pmf == 0.0) break;
        cdf += pmf;
    }
    return k;
}

// Transformed rejection with squeeze (Hoermann 1993, PTRS). Exact for mean >= 10.
std::int64_t poisson_ptrs(RandomStream& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        const double kd = static_cast<double>(k);
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + kd * loglam - std::lgamma(kd + 1.0)) {
            return k;
        }
    }
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(std::vector<std::uint64_t>{seed}) {}

RandomStream::RandomStream(std::vector<std::uint64_t> key)
    : key_(std::move(key)), engine_(seeded_engine(key_)) {}

RandomStream RandomStream::substream(std::uint64_t id) const {
    auto key = key_;
    key.push_back(id);
    return RandomStream(std::move(key));
}

RandomStream RandomStream::substream(std::initializer_list<std::uint64_t> path) const {
    auto key = key_;
    key.insert(key.end(), path.begin(), path.end());
    return RandomStream(std::move(key));
}

double RandomStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    const auto bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::int64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("poisson mean must be finite and nonnegative");
    }
    if (mean == 0.0) return 0;
    if (mean < 30.0) return poisson_inversion(*this, mean);
    return poisson_ptrs(*this, mean);
}

}  // namespace inar
