#include "inar/series.hpp"

#include "inar/errors.hpp"

namespace inar {

CountSeries::CountSeries(std::vector<Count> values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.empty()) throw DomainError("count series must contain at least one value");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] < 0) {
            throw DomainError("count series value at t=" + std::to_string(i + 1) + " is negative");
        }
    }
    if (!labels_.empty() && labels_.size() != values_.size()) {
        throw DomainError("label count does not match series length");
    }
}

CountSeries CountSeries::with_values(std::vector<Count> values) const {
    return CountSeries(std::move(values), labels_);
}

}  // namespace inar
