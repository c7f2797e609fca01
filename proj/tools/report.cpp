#include "report.hpp"

namespace inar::report {

namespace {

int parameter_count(const ConditionalModel& model) {
    const auto layout = model.layout();
    return layout.order + layout.mean_dim + static_cast<int>(model.profiles.size());
}

Json profiles_json(const ConditionalModel& model) {
    Json out = Json::array();
    for (const auto& p : model.profiles) out.push_back({{"tau", p.tau}, {"delta", p.delta}});
    return out;
}

Json intervention_json(const std::optional<Intervention>& iv) {
    return {{"available", iv.has_value()},
            {"tau", iv ? iv->tau : 0},
            {"delta", iv ? iv->delta : 0.0},
            {"kappa", iv ? iv->kappa : 0.0}};
}

}  // namespace

Json series_json(const CountSeries& series) {
    Json values = Json::array();
    for (Count v : series.values()) values.push_back(v);
    return values;
}

Json cls_json(const ClsFit& fit) {
    return {{"available", true},
            {"alphas", fit.alphas},
            {"lambda", fit.lambda},
            {"kappas", fit.kappas},
            {"rss", fit.rss},
            {"n_effective", fit.n_effective},
            {"outside_stationary_region", fit.outside_stationary_region}};
}

Json cls_unavailable() {
    return {{"available", false},
            {"alphas", Json::array()},
            {"lambda", 0.0},
            {"kappas", Json::array()},
            {"rss", 0.0},
            {"n_effective", 0},
            {"outside_stationary_region", false}};
}

Json cml_json(const CmlFit& fit, const ConditionalModel& model) {
    const Eigen::VectorXd mean = fit.theta.mean_params();
    const int k = parameter_count(model);
    Json se = Json::array();
    for (int i = 0; i < k; ++i) {
        if (fit.std_errors.empty()) {
            se.push_back(nullptr);
        } else {
            se.push_back(fit.std_errors[static_cast<std::size_t>(i)]);
        }
    }
    return {{"available", true},
            {"mean", model.constant_mean() ? "constant" : "log-linear"},
            {"alphas", fit.theta.alphas()},
            {"mean_params", std::vector<double>(mean.data(), mean.data() + mean.size())},
            {"profiles", profiles_json(model)},
            {"kappas", fit.theta.kappas()},
            {"loglik", fit.loglik},
            {"std_errors_available", !fit.std_errors.empty()},
            {"std_errors", se},
            {"converged", fit.converged},
            {"iterations", fit.iterations},
            {"gradient_norm", fit.gradient_norm}};
}

Json cml_unavailable(const ConditionalModel& model) {
    return {{"available", false},
            {"mean", model.constant_mean() ? "constant" : "log-linear"},
            {"alphas", Json::array()},
            {"mean_params", Json::array()},
            {"profiles", profiles_json(model)},
            {"kappas", Json::array()},
            {"loglik", 0.0},
            {"std_errors_available", false},
            {"std_errors", Json::array()},
            {"converged", false},
            {"iterations", 0},
            {"gradient_norm", 0.0}};
}

Json outcome_json(const TestOutcome& o) {
    return {{"available", o.available},
            {"method", std::string(to_string(o.method))},
            {"tau", o.tau},
            {"delta", o.delta},
            {"statistic", o.statistic},
            {"p_value", o.p_value},
            {"significant", o.significant},
            {"kappa_hat", o.kappa_hat}};
}

Json max_json(const MaxResult& r) {
    Json per_delta = Json::array();
    for (const auto& d : r.per_delta) {
        per_delta.push_back({{"available", d.available},
                             {"delta", d.delta},
                             {"tau", d.tau},
                             {"statistic", d.statistic},
                             {"kappa_hat", d.kappa_hat}});
    }
    Json unavailable = Json::array();
    for (const auto& p : r.unavailable) unavailable.push_back({{"tau", p.tau}, {"delta", p.delta}});
    return {{"best", outcome_json(r.best)},
            {"per_delta", per_delta},
            {"tau_range", {{"first", r.tau_range.first}, {"last", r.tau_range.last}}},
            {"unavailable_cells", unavailable}};
}

Json bootstrap_json(const BootstrapResult& r) {
    Json per_delta = Json::array();
    for (const auto& d : r.per_delta) {
        per_delta.push_back({{"available", d.available},
                             {"delta", d.delta},
                             {"tau", d.tau},
                             {"observed", d.observed},
                             {"kappa_hat", d.kappa_hat},
                             {"exceedances", d.exceedances},
                             {"effective_replicates", d.effective},
                             {"p_value", d.p_value}});
    }
    const auto& c = r.chosen;
    const Eigen::VectorXd& mean = r.null.mean_params;
    return {{"method", std::string(to_string(r.method))},
            {"replicates", r.replicates},
            {"failed_replicates", r.failed_replicates},
            {"failures", r.failures},
            {"null", {{"alphas", r.null.alphas},
                      {"mean_params", std::vector<double>(mean.data(), mean.data() + mean.size())},
                      {"clipped", r.null.clipped}}},
            {"per_delta", per_delta},
            {"chosen", {{"available", c.has_value()},
                        {"delta", c ? c->delta : 0.0},
                        {"tau", c ? c->tau : 0},
                        {"statistic", c ? c->statistic : 0.0},
                        {"p_value", c ? c->p_value : 1.0},
                        {"kappa_hat", c ? c->kappa_hat : 0.0}}},
            {"significant", r.significant}};
}

Json detection_json(const DetectionReport& report, const DetectionConfig& config, const ConditionalModel& model) {
    Json iterations = Json::array();
    for (const auto& it : report.iterations) {
        const Eigen::VectorXd& alt_mean = it.alt_mean_params;
        Json entry = {
            {"iteration", it.index},
            {"method", std::string(to_string(config.method))},
            {"clean_cls", it.cls ? cls_json(*it.cls) : cls_unavailable()},
            {"clean_cml", it.cml ? cml_json(*it.cml, model) : cml_unavailable(model)},
            {"statistic", it.statistic},
            {"p_value", it.p_value},
            {"critical_value", it.critical_value},
            {"detected", it.detected},
            {"intervention", intervention_json(it.intervention)},
            {"alternative", {{"available", !it.alt_alphas.empty()},
                             {"alphas", it.alt_alphas},
                             {"mean_params", std::vector<double>(alt_mean.data(), alt_mean.data() + alt_mean.size())}}},
            {"corrected", it.corrected},
            {"bootstrap", it.bootstrap ? bootstrap_json(*it.bootstrap) : Json(nullptr)},
            {"scan", it.scan ? max_json(*it.scan) : Json(nullptr)},
            {"series", series_json(it.series)},
            {"warnings", it.warnings},
        };
        iterations.push_back(std::move(entry));
    }
    Json interventions = Json::array();
    for (const auto& iv : report.interventions) {
        interventions.push_back({{"tau", iv.tau}, {"delta", iv.delta}, {"kappa", iv.kappa}});
    }
    return {{"iterations", iterations},
            {"interventions", interventions},
            {"terminated_reason", std::string(to_string(report.reason))},
            {"failure", report.failure},
            {"final_cls", report.final_cls ? cls_json(*report.final_cls) : cls_unavailable()},
            {"final_cml", report.final_cml ? cml_json(*report.final_cml, model) : cml_unavailable(model)},
            {"final_series", series_json(report.final_series)}};
}

Json envelope(const std::string& command, Json config, Json results, const std::vector<std::string>& warnings) {
    return {{"command", command},
            {"config", std::move(config)},
            {"results", std::move(results)},
            {"warnings", warnings}};
}

}  // namespace inar::report
