#pragma once

#include "inar/bootstrap.hpp"
#include "inar/detection.hpp"
#include "inar/statistics.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace inar::report {

using Json = nlohmann::ordered_json;

Json series_json(const CountSeries& series);
Json cls_json(const ClsFit& fit);
Json cls_unavailable();
Json cml_json(const CmlFit& fit, const ConditionalModel& model);
Json cml_unavailable(const ConditionalModel& model);
Json outcome_json(const TestOutcome& outcome);
Json max_json(const MaxResult& result);
Json bootstrap_json(const BootstrapResult& result);
Json detection_json(const DetectionReport& report, const DetectionConfig& config, const ConditionalModel& model);

/// Top-level document {command, config, results, warnings}.
Json envelope(const std::string& command, Json config, Json results, const std::vector<std::string>& warnings);

}  // namespace inar::report
