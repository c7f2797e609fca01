#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace inar {

/// Seeded pseudo-random stream with deterministic substream derivation.
///
/// A stream is identified by a key: the master seed followed by the ids of
/// every `substream()` call that led to it. The engine is seeded from the
/// full key through `std::seed_seq`, so two streams with different keys are
/// statistically independent and a stream's draws never depend on how many
/// draws were taken from its parent or siblings. All variate generation is
/// implemented here rather than through `<random>` distributions, whose
/// algorithms are implementation-defined, so output is identical across
/// standard libraries.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed);

    /// Child stream for component `id`. Does not advance this stream.
    [[nodiscard]] RandomStream substream(std::uint64_t id) const;
    [[nodiscard]] RandomStream substream(std::initializer_list<std::uint64_t> path) const;

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform();

    /// Exact Poisson variate. A mean of zero returns 0 without consuming draws.
    std::int64_t poisson(double mean);

    [[nodiscard]] const std::vector<std::uint64_t>& key() const noexcept { return key_; }

private:
    explicit RandomStream(std::vector<std::uint64_t> key);

    std::vector<std::uint64_t> key_;
    std::mt19937_64 engine_;
};

}  // namespace inar
