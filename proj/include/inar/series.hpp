#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace inar {

using Count = std::int64_t;

/// Observed counts y_1..y_n with optional per-observation labels.
///
/// Time indices in the public API are 1-based (t = 1 is the first count),
/// matching the usual time-series notation; `values()` exposes the 0-based
/// storage for bulk access.
class CountSeries {
public:
    explicit CountSeries(std::vector<Count> values, std::vector<std::string> labels = {});

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] int length() const noexcept { return static_cast<int>(values_.size()); }

    /// Count at 1-based time t.
    [[nodiscard]] Count at(int t) const { return values_.at(static_cast<std::size_t>(t - 1)); }

    [[nodiscard]] std::span<const Count> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] bool has_labels() const noexcept { return !labels_.empty(); }

    /// Copy with replaced values; labels are kept.
    [[nodiscard]] CountSeries with_values(std::vector<Count> values) const;

    friend bool operator==(const CountSeries&, const CountSeries&) = default;

private:
    std::vector<Count> values_;
    std::vector<std::string> labels_;
};

}  // namespace inar
