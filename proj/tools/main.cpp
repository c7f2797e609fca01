#include "report.hpp"

#include "inar/errors.hpp"
#include "inar/io.hpp"
#include "inar/simulate.hpp"
#include "inar/study.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using inar::report::Json;

constexpr int kUnavailable = 1;
constexpr int kUsage = 2;

/// Options shared by the commands that read a series.
struct ModelOptions {
    std::string input;
    int order = 1;
    int seasonal = 0;
    bool trend = false;
    std::string covariates;

    void add(CLI::App& cmd, bool needs_input) {
        auto* in = cmd.add_option("--input", input, "counts CSV: count or label,count per row")
                       ->check(CLI::ExistingFile);
        if (needs_input) in->required();
        cmd.add_option("--order", order, "autoregressive order p")->check(CLI::PositiveNumber);
        auto* s = cmd.add_option("--seasonal", seasonal, "log-linear mean with sin/cos terms of this period");
        cmd.add_flag("--trend", trend, "add a t/n trend column to --seasonal")->needs(s);
        cmd.add_option("--covariates", covariates, "covariate CSV, one row per time point")
            ->check(CLI::ExistingFile)
            ->excludes(s);
    }

    [[nodiscard]] std::shared_ptr<const Eigen::MatrixXd> covariate_matrix(int rows) const {
        if (seasonal > 0) {
            return std::make_shared<Eigen::MatrixXd>(inar::build_seasonal_covariates(rows, seasonal, trend));
        }
        if (!covariates.empty()) return std::make_shared<Eigen::MatrixXd>(inar::read_covariates_csv(covariates));
        return nullptr;
    }

    [[nodiscard]] Json config() const {
        return {{"input", input},
                {"order", order},
                {"seasonal_period", seasonal},
                {"trend", trend},
                {"covariates", covariates}};
    }
};

struct Output {
    std::string path;

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw inar::ConfigError("cannot write " + path);
        out << text;
    }
};

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::vector<inar::InterventionProfile> parse_profiles(const std::vector<std::string>& specs) {
    std::vector<inar::InterventionProfile> out;
    for (const auto& s : specs) {
        std::istringstream in(s);
        inar::InterventionProfile p;
        char colon = 0;
        if (!(in >> p.tau >> colon >> p.delta) || colon != ':' || !in.eof()) {
            throw inar::ConfigError("intervention '" + s + "' is not TAU:DELTA");
        }
        out.push_back(p);
    }
    return out;
}

std::vector<inar::Intervention> parse_interventions(const std::vector<std::string>& specs) {
    std::vector<inar::Intervention> out;
    for (const auto& s : specs) {
        std::istringstream in(s);
        inar::Intervention iv;
        char c1 = 0;
        char c2 = 0;
        if (!(in >> iv.tau >> c1 >> iv.delta >> c2 >> iv.kappa) || c1 != ':' || c2 != ':' || !in.eof()) {
            throw inar::ConfigError("intervention '" + s + "' is not TAU:DELTA:KAPPA");
        }
        out.push_back(iv);
    }
    return out;
}

Json profiles_config(const std::vector<inar::InterventionProfile>& profiles) {
    Json out = Json::array();
    for (const auto& p : profiles) out.push_back({{"tau", p.tau}, {"delta", p.delta}});
    return out;
}

int run_simulate(const ModelOptions& m, int n, const std::vector<double>& alphas, std::optional<double> lambda,
                 const std::vector<double>& betas, const std::vector<std::string>& iv_specs, int burn_in,
                 std::uint64_t seed, const Output& csv, const Output& report) {
    if (lambda.has_value() == !betas.empty()) throw inar::ConfigError("give exactly one of --lambda and --beta");
    if (!betas.empty() && m.seasonal == 0 && m.covariates.empty()) {
        throw inar::ConfigError("--beta needs --seasonal or --covariates");
    }
    const auto ivs = parse_interventions(iv_specs);
    std::optional<inar::InarModel> model;
    if (lambda) {
        model.emplace(alphas, inar::MeanSpec::constant(*lambda));
    } else {
        std::shared_ptr<const Eigen::MatrixXd> x;
        if (m.seasonal > 0) {
            x = std::make_shared<Eigen::MatrixXd>(inar::build_seasonal_covariates(n, m.seasonal, m.trend, burn_in));
        } else {
            x = m.covariate_matrix(0);
        }
        const Eigen::VectorXd beta =
            Eigen::Map<const Eigen::VectorXd>(betas.data(), static_cast<Eigen::Index>(betas.size()));
        model.emplace(alphas, inar::MeanSpec::log_linear(beta, x));
    }
    inar::SimulationOptions opts;
    opts.burn_in = burn_in;
    const auto series = inar::simulate_contaminated(*model, ivs, n, opts, inar::RandomStream(seed));

    std::ostringstream out;
    inar::write_counts_csv(out, series);
    csv.write(out.str());
    if (!report.path.empty()) {
        Json ivj = Json::array();
        for (const auto& iv : ivs) ivj.push_back({{"tau", iv.tau}, {"delta", iv.delta}, {"kappa", iv.kappa}});
        Json config = {{"n", n},
                       {"alphas", alphas},
                       {"lambda", lambda ? Json(*lambda) : Json(nullptr)},
                       {"betas", betas},
                       {"seasonal_period", m.seasonal},
                       {"trend", m.trend},
                       {"covariates", m.covariates},
                       {"interventions", ivj},
                       {"burn_in", burn_in},
                       {"seed", seed}};
        const Json results = {{"series", inar::report::series_json(series)}};
        report.write(dump(inar::report::envelope("simulate", config, results, {})));
    }
    return 0;
}

int run_fit(const ModelOptions& m, const std::string& method, const std::vector<std::string>& iv_specs,
            const Output& output) {
    if (method != "cls" && method != "cml" && method != "both") {
        throw inar::ConfigError("--method must be cls, cml or both");
    }
    const auto series = inar::read_counts_csv(m.input);
    const inar::ConditionalModel model{m.order, m.covariate_matrix(series.length()), parse_profiles(iv_specs)};
    std::vector<std::string> warnings;
    Json results = Json::object();
    int status = 0;
    if (method != "cml") {
        if (!model.constant_mean()) throw inar::UnsupportedError("CLS needs a constant mean; use --method cml");
        try {
            const auto fit = inar::fit_cls(series, model.order, model.profiles);
            if (fit.outside_stationary_region) warnings.emplace_back("CLS estimates lie outside the stationary region");
            results["cls"] = inar::report::cls_json(fit);
        } catch (const inar::RankError& e) {
            warnings.push_back(std::string("CLS fit unavailable: ") + e.what());
            results["cls"] = inar::report::cls_unavailable();
            status = kUnavailable;
        }
    }
    if (method != "cls") {
        const auto fit = inar::fit_cml(series, model);
        if (!fit.converged) {
            warnings.emplace_back("CML fit did not converge");
            status = kUnavailable;
        }
        results["cml"] = inar::report::cml_json(fit, model);
    }
    Json config = m.config();
    config["method"] = method;
    config["interventions"] = profiles_config(model.profiles);
    output.write(dump(inar::report::envelope("fit", config, results, warnings)));
    return status;
}

struct TestOptions {
    std::string method = "score";
    std::optional<int> tau;
    std::optional<double> delta;
    std::vector<double> deltas = inar::default_delta_grid();
    int edge_margin = 0;
    double level = 0.05;
    std::optional<double> critical_value;
    int bootstrap = 0;
    std::optional<std::uint64_t> seed;
};

int run_test(const ModelOptions& m, const TestOptions& o, int threads, const Output& output) {
    const auto method = inar::parse_method(o.method);
    if (o.tau.has_value() != o.delta.has_value()) throw inar::ConfigError("--tau and --delta go together");
    if (o.bootstrap > 0 && !o.seed) throw inar::ConfigError("--bootstrap needs --seed");
    if (o.bootstrap > 0 && o.tau) throw inar::ConfigError("--bootstrap scans every tau; drop --tau/--delta");
    const auto series = inar::read_counts_csv(m.input);
    const inar::ConditionalModel model{m.order, m.covariate_matrix(series.length()), {}};

    Json config = m.config();
    config["method"] = std::string(inar::to_string(method));
    config["level"] = o.level;
    Json results;
    int status = 0;
    if (o.tau) {
        config["tau"] = *o.tau;
        config["delta"] = *o.delta;
        const auto outcome = inar::test_at(series, model, {*o.tau, *o.delta}, method, o.level);
        if (!outcome.available) status = kUnavailable;
        results = inar::report::outcome_json(outcome);
    } else if (o.bootstrap > 0) {
        inar::BootstrapOptions opts;
        opts.replicates = o.bootstrap;
        opts.level = o.level;
        opts.delta_grid = o.deltas;
        opts.edge_margin = o.edge_margin;
        opts.threads = threads;
        config["deltas"] = o.deltas;
        config["edge_margin"] = o.edge_margin;
        config["bootstrap"] = o.bootstrap;
        config["seed"] = *o.seed;
        const auto res = inar::bootstrap_test(series, model, method, opts, inar::RandomStream(*o.seed));
        if (!res.chosen) status = kUnavailable;
        results = inar::report::bootstrap_json(res);
    } else {
        config["deltas"] = o.deltas;
        config["edge_margin"] = o.edge_margin;
        config["critical_value"] = o.critical_value ? Json(*o.critical_value) : Json(nullptr);
        const inar::StatisticScanner scanner(series, model, method);
        const auto range = inar::default_tau_range(series.length(), m.order, o.edge_margin);
        const auto res = inar::max_statistic(scanner, o.deltas, range, o.level, o.critical_value, threads);
        if (!res.best.available) status = kUnavailable;
        results = inar::report::max_json(res);
    }
    output.write(dump(inar::report::envelope("test", config, results, {})));
    return status;
}

int run_detect(const ModelOptions& m, const TestOptions& o, bool critical_mode, int max_iterations, int threads,
               const Output& output) {
    inar::DetectionConfig c;
    c.method = inar::parse_method(o.method);
    c.order = m.order;
    c.delta_grid = o.deltas;
    c.edge_margin = o.edge_margin;
    c.mode = critical_mode ? inar::DetectionMode::kCriticalValue : inar::DetectionMode::kBootstrap;
    c.replicates = o.bootstrap;
    c.critical_value = o.critical_value;
    c.level = o.level;
    c.max_iterations = max_iterations;
    c.threads = threads;
    if (c.method == inar::TestMethod::kF && (m.seasonal > 0 || !m.covariates.empty())) {
        throw inar::UnsupportedError("the F statistic needs a constant mean; use --method score for regression means");
    }
    if (!critical_mode && !o.seed) throw inar::ConfigError("bootstrap detection needs --seed");
    c.seed = o.seed.value_or(0);
    const auto series = inar::read_counts_csv(m.input);
    c.covariates = m.covariate_matrix(series.length());
    const inar::ConditionalModel model{c.order, c.covariates, {}};
    const auto report = inar::run_iterative_detection(series, c);

    Json config = m.config();
    config["method"] = std::string(inar::to_string(c.method));
    config["mode"] = critical_mode ? "critical-value" : "bootstrap";
    config["bootstrap"] = critical_mode ? 0 : o.bootstrap;
    config["critical_value"] = o.critical_value ? Json(*o.critical_value) : Json(nullptr);
    config["level"] = o.level;
    config["deltas"] = o.deltas;
    config["edge_margin"] = o.edge_margin;
    config["max_iterations"] = max_iterations;
    config["seed"] = o.seed ? Json(*o.seed) : Json(nullptr);
    output.write(dump(inar::report::envelope("detect", config, inar::report::detection_json(report, c, model),
                                             report.warnings)));
    return report.reason == inar::Termination::kFailure ? kUnavailable : 0;
}

struct StudyOptions {
    std::string kind;
    std::string preset = "inar1";
    int replicates = 2000;
    std::uint64_t seed = 0;
    std::optional<int> n;
    std::vector<std::string> methods;
    std::vector<double> tau_fractions;
    std::vector<double> levels;
};

int run_study_command(const StudyOptions& o, int threads, const Output& csv, const Output& report) {
    auto spec = inar::study_preset(o.preset, inar::parse_study_kind(o.kind));
    spec.replicates = o.replicates;
    spec.seed = o.seed;
    spec.threads = threads;
    if (o.n) spec.n = *o.n;
    if (!o.methods.empty()) {
        spec.methods.clear();
        for (const auto& name : o.methods) spec.methods.push_back(inar::parse_method(name));
    }
    if (!o.tau_fractions.empty()) spec.tau_fractions = o.tau_fractions;
    if (!o.levels.empty()) spec.levels = o.levels;
    const auto table = inar::run_study(spec);
    std::ostringstream out;
    inar::write_study_csv(out, table);
    csv.write(out.str());
    if (!report.path.empty()) {
        std::vector<std::string> methods;
        for (const auto method : spec.methods) methods.emplace_back(inar::to_string(method));
        Json config = {{"kind", std::string(inar::to_string(spec.kind))},
                       {"preset", o.preset},
                       {"replicates", spec.replicates},
                       {"seed", spec.seed},
                       {"n", spec.n},
                       {"methods", methods},
                       {"tau_fractions", spec.tau_fractions},
                       {"levels", spec.levels}};
        Json results = {{"rows", table.rows.size()}, {"failed_replicates", table.failed_replicates}};
        std::vector<std::string> warnings;
        if (table.failed_replicates > 0) {
            warnings.push_back(std::to_string(table.failed_replicates) +
                               " replicate fits failed; their cells are excluded");
        }
        report.write(dump(inar::report::envelope("study", config, results, warnings)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intervention and outlier detection for Poisson INAR(p) count series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a (contaminated) INAR(p) series to CSV");
    ModelOptions sim_model;
    sim_model.add(*sim, false);
    int sim_n = 0;
    std::vector<double> sim_alphas;
    std::optional<double> sim_lambda;
    std::vector<double> sim_betas;
    std::vector<std::string> sim_ivs;
    int burn_in = 500;
    std::uint64_t sim_seed = 0;
    Output sim_csv;
    Output sim_report;
    sim->add_option("--n", sim_n, "series length")->required()->check(CLI::PositiveNumber);
    sim->add_option("--alpha", sim_alphas, "thinning probabilities alpha_1..alpha_p")->required()->delimiter(',');
    sim->add_option("--lambda", sim_lambda, "constant innovation mean");
    sim->add_option("--beta", sim_betas, "log-linear mean coefficients")->delimiter(',');
    sim->add_option("--intervention", sim_ivs, "TAU:DELTA:KAPPA, repeatable");
    sim->add_option("--burn-in", burn_in, "discarded initial steps")->capture_default_str();
    sim->add_option("--seed", sim_seed, "master seed")->required();
    sim->add_option("--output", sim_csv.path, "counts CSV (default stdout)");
    sim->add_option("--report", sim_report.path, "JSON report");

    // fit
    auto* fit = app.add_subcommand("fit", "fit the clean or contaminated model by CLS and/or CML");
    ModelOptions fit_model;
    fit_model.add(*fit, true);
    std::string fit_method = "both";
    std::vector<std::string> fit_ivs;
    Output fit_out;
    fit->add_option("--method", fit_method, "cls, cml or both")->capture_default_str();
    fit->add_option("--intervention", fit_ivs, "fixed TAU:DELTA profile, repeatable");
    fit->add_option("--output", fit_out.path, "JSON report (default stdout)");

    // test
    auto* test = app.add_subcommand("test", "test at a known (tau, delta), scan for the maximum, or bootstrap it");
    ModelOptions test_model;
    test_model.add(*test, true);
    TestOptions test_opts;
    Output test_out;
    test->add_option("--method", test_opts.method, "f or score")->capture_default_str();
    test->add_option("--tau", test_opts.tau, "intervention time");
    test->add_option("--delta", test_opts.delta, "intervention decay in [0, 1]");
    test->add_option("--deltas", test_opts.deltas, "delta grid for the scan")->delimiter(',');
    test->add_option("--edge-margin", test_opts.edge_margin, "times excluded at each end of the scan");
    test->add_option("--level", test_opts.level, "significance level")->capture_default_str();
    test->add_option("--critical-value", test_opts.critical_value, "critical value for the maximum statistic");
    test->add_option("--bootstrap", test_opts.bootstrap, "bootstrap replicates for the maximum statistic");
    test->add_option("--seed", test_opts.seed, "master seed (required with --bootstrap)");
    test->add_option("--output", test_out.path, "JSON report (default stdout)");

    // detect
    auto* detect = app.add_subcommand("detect", "iterative detection, classification and correction");
    ModelOptions det_model;
    det_model.add(*detect, true);
    TestOptions det_opts;
    det_opts.bootstrap = 500;
    bool critical_mode = false;
    int max_iterations = 10;
    Output det_out;
    detect->add_option("--method", det_opts.method, "f or score")->capture_default_str();
    detect->add_option("--bootstrap", det_opts.bootstrap, "bootstrap replicates per iteration")->capture_default_str();
    detect->add_flag("--critical-values", critical_mode, "test against tabulated critical values instead");
    detect->add_option("--critical-value", det_opts.critical_value, "override the tabulated critical value");
    detect->add_option("--level", det_opts.level, "significance level")->capture_default_str();
    detect->add_option("--deltas", det_opts.deltas, "delta grid")->delimiter(',');
    detect->add_option("--edge-margin", det_opts.edge_margin, "times excluded at each end of the scan");
    detect->add_option("--max-iterations", max_iterations, "iteration cap")->capture_default_str();
    detect->add_option("--seed", det_opts.seed, "master seed (required for bootstrap mode)");
    detect->add_option("--output", det_out.path, "JSON report (default stdout)");

    // study
    auto* study = app.add_subcommand("study", "Monte Carlo size, power, classification or critical-value study");
    StudyOptions study_opts;
    Output study_csv;
    Output study_report;
    study->add_option("--kind", study_opts.kind, "size, power, classification or critical-values")->required();
    study->add_option("--preset", study_opts.preset, "inar1 or inar2")->capture_default_str();
    study->add_option("--replicates", study_opts.replicates, "replicates per cell")->capture_default_str();
    study->add_option("--seed", study_opts.seed, "master seed")->required();
    study->add_option("--n", study_opts.n, "series length (default 200)");
    study->add_option("--methods", study_opts.methods, "f,score")->delimiter(',');
    study->add_option("--tau-fractions", study_opts.tau_fractions, "tau as fractions of n")->delimiter(',');
    study->add_option("--levels", study_opts.levels, "nominal levels")->delimiter(',');
    study->add_option("--output", study_csv.path, "study CSV (default stdout)");
    study->add_option("--report", study_report.path, "JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*sim) {
            return run_simulate(sim_model, sim_n, sim_alphas, sim_lambda, sim_betas, sim_ivs, burn_in, sim_seed,
                                sim_csv, sim_report);
        }
        if (*fit) return run_fit(fit_model, fit_method, fit_ivs, fit_out);
        if (*test) return run_test(test_model, test_opts, threads, test_out);
        if (*detect) return run_detect(det_model, det_opts, critical_mode, max_iterations, threads, det_out);
        if (*study) return run_study_command(study_opts, threads, study_csv, study_report);
    } catch (const inar::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const inar::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const inar::UnsupportedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const inar::Error& e) {
        std::cerr << "unavailable: " << e.what() << '\n';
        return kUnavailable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnavailable;
    }
    return kUsage;
}
