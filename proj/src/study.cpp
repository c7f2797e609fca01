#include "inar/study.hpp"

#include "inar/errors.hpp"
#include "inar/parallel.hpp"
#include "inar/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace inar {

std::string_view to_string(StudyKind kind) noexcept {
    switch (kind) {
        case StudyKind::kSize: return "size";
        case StudyKind::kPower: return "power";
        case StudyKind::kClassification: return "classification";
        case StudyKind::kCriticalValues: return "critical-values";
    }
    return "unknown";
}

StudyKind parse_study_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const StudyKind kind :
         {StudyKind::kSize, StudyKind::kPower, StudyKind::kClassification, StudyKind::kCriticalValues}) {
        if (lower == to_string(kind)) return kind;
    }
    throw ConfigError("unknown study kind '" + std::string(text) +
                      "' (expected size, power, classification or critical-values)");
}

double scaled_kappa(double delta, double lambda) {
    static const std::map<double, double> kMultiple{{0.0, 3.0}, {0.6, 2.5}, {0.8, 2.0}, {0.9, 1.5}, {1.0, 1.0}};
    const auto it = kMultiple.find(delta);
    if (it == kMultiple.end()) throw ConfigError("no intervention size rule for delta = " + std::to_string(delta));
    return it->second * std::sqrt(lambda);
}

StudySpec study_preset(std::string_view name, StudyKind kind) {
    StudySpec spec;
    spec.kind = kind;
    if (name == "inar1") {
        for (double a : {0.3, 0.6, 0.9}) {
            for (double l : {2.0, 5.0}) spec.models.push_back({{a}, l});
        }
    } else if (name == "inar2") {
        spec.methods = {TestMethod::kF};
        for (const auto& [a1, a2] : {std::pair{0.5, 0.3}, std::pair{0.3, 0.4}, std::pair{0.1, 0.1}}) {
            for (double l : {2.0, 5.0}) spec.models.push_back({{a1, a2}, l});
        }
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected inar1 or inar2)");
    }
    switch (kind) {
        case StudyKind::kSize: break;
        case StudyKind::kPower: spec.true_deltas = {0.0, 0.8, 1.0}; break;
        case StudyKind::kClassification:
            spec.tested_deltas = default_delta_grid();
            spec.true_deltas = {std::nullopt, 0.0, 0.6, 0.8, 0.9, 1.0};
            break;
        case StudyKind::kCriticalValues: spec.levels.clear(); break;
    }
    return spec;
}

double empirical_quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw DomainError("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Scenario {
    std::optional<double> delta_true;
    std::vector<int> taus;          ///< tested times; the intervention sits at taus[0] when present
};

int tau_of(double fraction, int n) { return static_cast<int>(std::lround(fraction * n)); }

void validate(const StudySpec& spec) {
    if (spec.replicates < 1) throw ConfigError("a study needs at least one replicate");
    if (spec.models.empty()) throw ConfigError("a study needs at least one model setting");
    if (spec.methods.empty()) throw ConfigError("a study needs at least one method");
    if (spec.tested_deltas.empty()) throw ConfigError("the tested delta grid is empty");
    for (double d : spec.tested_deltas) {
        if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("tested deltas must lie in [0, 1]");
    }
    for (const auto& m : spec.models) {
        if (m.alphas.empty()) throw ConfigError("model settings need at least one alpha");
        (void)InarModel(m.alphas, MeanSpec::constant(m.lambda));
        const bool score = std::find(spec.methods.begin(), spec.methods.end(), TestMethod::kScore) !=
                           spec.methods.end();
        if (score && m.alphas.size() != 1) throw ConfigError("the score method supports order 1 only");
        if (spec.kind == StudyKind::kCriticalValues) {
            (void)default_tau_range(spec.n, static_cast<int>(m.alphas.size()));
            continue;
        }
        for (double f : spec.tau_fractions) {
            if (!(f > 0.0 && f <= 1.0)) throw ConfigError("tau fractions must lie in (0, 1]");
            if (tau_of(f, spec.n) <= static_cast<int>(m.alphas.size())) {
                throw ConfigError("tau = " + std::to_string(tau_of(f, spec.n)) + " does not exceed the order");
            }
        }
    }
    if (spec.kind == StudyKind::kCriticalValues) {
        if (spec.quantiles.empty()) throw ConfigError("a critical-value study needs quantile probabilities");
        for (double q : spec.quantiles) {
            if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile probabilities must lie in (0, 1)");
        }
        return;
    }
    if (spec.tau_fractions.empty()) throw ConfigError("a study needs at least one tau fraction");
    if (spec.levels.empty()) throw ConfigError("a study needs at least one level");
    for (double l : spec.levels) {
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("levels must lie in (0, 1)");
    }
    if (spec.kind != StudyKind::kSize) {
        if (spec.true_deltas.empty()) throw ConfigError("power and classification studies need true deltas");
        for (const auto& d : spec.true_deltas) {
            if (d) (void)scaled_kappa(*d, 1.0);
        }
    }
}

std::vector<Scenario> scenarios_of(const StudySpec& spec) {
    std::vector<int> all_taus;
    for (double f : spec.tau_fractions) all_taus.push_back(tau_of(f, spec.n));
    if (spec.kind == StudyKind::kSize) return {{std::nullopt, all_taus}};
    if (spec.kind == StudyKind::kCriticalValues) return {{std::nullopt, {}}};
    std::vector<Scenario> out;
    for (const auto& d : spec.true_deltas) {
        if (!d) {
            out.push_back({std::nullopt, all_taus});
            continue;
        }
        for (int tau : all_taus) out.push_back({d, {tau}});
    }
    return out;
}

/// Statistics for one (model, scenario, replicate) and one method, indexed by
/// (tau, tested delta); critical-value studies hold the per-delta maxima and
/// then the overall maximum.
using CellStats = std::vector<std::optional<double>>;

struct UnitResult {
    std::vector<CellStats> per_method;
    int failed = 0;
};

UnitResult evaluate_unit(const StudySpec& spec, const ModelSetting& model, const Scenario& scenario,
                         const RandomStream& rng) {
    const InarModel inar(model.alphas, MeanSpec::constant(model.lambda));
    std::vector<Intervention> ivs;
    if (scenario.delta_true) {
        ivs.push_back({scenario.taus.front(), *scenario.delta_true, scaled_kappa(*scenario.delta_true, model.lambda)});
    }
    const CountSeries series = simulate_contaminated(inar, ivs, spec.n, {}, rng);
    const int p = static_cast<int>(model.alphas.size());
    const ConditionalModel null_model{p, nullptr, {}};
    const std::size_t grid = spec.tested_deltas.size();
    const std::size_t cells =
        spec.kind == StudyKind::kCriticalValues ? grid + 1 : scenario.taus.size() * grid;

    UnitResult result;
    for (const TestMethod method : spec.methods) {
        CellStats stats(cells);
        try {
            const StatisticScanner scanner(series, null_model, method, spec.cml);
            if (spec.kind == StudyKind::kCriticalValues) {
                const auto scan = max_statistic(scanner, spec.tested_deltas, default_tau_range(spec.n, p), 0.05);
                for (std::size_t k = 0; k < grid; ++k) {
                    if (scan.per_delta[k].available) stats[k] = scan.per_delta[k].statistic;
                }
                if (scan.best.available) stats[grid] = scan.best.statistic;
            } else {
                for (std::size_t i = 0; i < scenario.taus.size(); ++i) {
                    for (std::size_t k = 0; k < grid; ++k) {
                        const auto cell = scanner.evaluate({scenario.taus[i], spec.tested_deltas[k]});
                        if (cell) stats[i * grid + k] = cell->statistic;
                    }
                }
            }
        } catch (const ConvergenceError&) {
            ++result.failed;
        } catch (const SingularityError&) {
            ++result.failed;
        } catch (const RankError&) {
            ++result.failed;
        }
        result.per_method.push_back(std::move(stats));
    }
    return result;
}

StudyRow rate_row(const StudySpec& spec, TestMethod method, const ModelSetting& model, const Scenario& scenario,
                  std::optional<double> tested, int tau, double level, int hits, int available) {
    StudyRow row;
    row.kind = spec.kind;
    row.method = method;
    row.model = model;
    row.n = spec.n;
    row.delta_true = scenario.delta_true;
    row.delta_tested = tested;
    row.tau = tau;
    row.level = level;
    row.replicates = available;
    if (available > 0) {
        const double r = static_cast<double>(hits) / available;
        row.rate_pct = 100.0 * r;
        row.mc_se_pct = 100.0 * std::sqrt(r * (1.0 - r) / available);
    }
    return row;
}

}  // namespace

StudyTable run_study(const StudySpec& spec) {
    validate(spec);
    const auto scenarios = scenarios_of(spec);
    const std::size_t n_models = spec.models.size();
    const std::size_t n_scen = scenarios.size();
    const auto reps = static_cast<std::size_t>(spec.replicates);
    const RandomStream master(spec.seed);

    std::vector<UnitResult> units(n_models * n_scen * reps);
    parallel_for(units.size(), spec.threads, [&](std::size_t u) {
        const std::size_t m = u / (n_scen * reps);
        const std::size_t s = (u / reps) % n_scen;
        const std::size_t r = u % reps;
        units[u] = evaluate_unit(spec, spec.models[m], scenarios[s], master.substream({m, s, r}));
    });

    StudyTable table;
    for (const auto& unit : units) table.failed_replicates += unit.failed;
    const std::size_t grid = spec.tested_deltas.size();
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        const TestMethod method = spec.methods[mi];
        for (std::size_t m = 0; m < n_models; ++m) {
            for (std::size_t s = 0; s < n_scen; ++s) {
                const Scenario& sc = scenarios[s];
                const auto cell_values = [&](std::size_t cell) {
                    std::vector<double> out;
                    for (std::size_t r = 0; r < reps; ++r) {
                        const auto& v = units[(m * n_scen + s) * reps + r].per_method[mi][cell];
                        if (v) out.push_back(*v);
                    }
                    return out;
                };

                if (spec.kind == StudyKind::kCriticalValues) {
                    for (std::size_t k = 0; k <= grid; ++k) {
                        const auto values = cell_values(k);
                        for (double q : spec.quantiles) {
                            StudyRow row;
                            row.kind = spec.kind;
                            row.method = method;
                            row.model = spec.models[m];
                            row.n = spec.n;
                            if (k < grid) row.delta_tested = spec.tested_deltas[k];
                            row.level = q;
                            row.replicates = static_cast<int>(values.size());
                            if (!values.empty()) row.quantile = empirical_quantile(values, q);
                            table.rows.push_back(row);
                        }
                    }
                    continue;
                }

                for (std::size_t i = 0; i < sc.taus.size(); ++i) {
                    if (spec.kind != StudyKind::kClassification) {
                        for (std::size_t k = 0; k < grid; ++k) {
                            const auto values = cell_values(i * grid + k);
                            for (double level : spec.levels) {
                                const auto hits = std::count_if(values.begin(), values.end(),
                                                                [level](double v) { return is_significant(v, level); });
                                table.rows.push_back(rate_row(spec, method, spec.models[m], sc,
                                                              spec.tested_deltas[k], sc.taus[i], level,
                                                              static_cast<int>(hits), static_cast<int>(values.size())));
                            }
                        }
                        continue;
                    }
                    for (double level : spec.levels) {
                        const double threshold = chi2_quantile(1.0 - level);
                        std::map<double, int> counts;
                        int none = 0;
                        int available = 0;
                        for (std::size_t r = 0; r < reps; ++r) {
                            const auto& stats = units[(m * n_scen + s) * reps + r].per_method[mi];
                            std::map<double, double> per_delta;
                            for (std::size_t k = 0; k < grid; ++k) {
                                if (const auto& v = stats[i * grid + k]) per_delta[spec.tested_deltas[k]] = *v;
                            }
                            if (per_delta.empty()) continue;
                            ++available;
                            if (const auto cls = classify_by_max(per_delta, threshold)) {
                                ++counts[*cls];
                            } else {
                                ++none;
                            }
                        }
                        for (double d : spec.tested_deltas) {
                            table.rows.push_back(rate_row(spec, method, spec.models[m], sc, d, sc.taus[i], level,
                                                          counts[d], available));
                        }
                        table.rows.push_back(rate_row(spec, method, spec.models[m], sc, std::nullopt, sc.taus[i], level,
                                                      none, available));
                    }
                }
            }
        }
    }
    return table;
}

namespace {

std::string number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

void write_study_csv(std::ostream& out, const StudyTable& table) {
    out << "kind,method,p,alpha1,alpha2,lambda,n,delta_true,delta_tested,tau,level,rate_pct,mc_se_pct,quantile,"
           "replicates\n";
    for (const auto& row : table.rows) {
        const bool quantile_row = row.kind == StudyKind::kCriticalValues;
        const auto& a = row.model.alphas;
        out << to_string(row.kind) << ',' << to_string(row.method) << ',' << a.size() << ',' << number(a.at(0))
            << ',' << (a.size() > 1 ? number(a[1]) : "") << ',' << number(row.model.lambda) << ',' << row.n << ','
            << (row.delta_true ? number(*row.delta_true) : "none") << ','
            << (row.delta_tested ? number(*row.delta_tested) : (quantile_row ? "all" : "none")) << ','
            << (row.tau ? std::to_string(*row.tau) : "") << ',' << number(row.level) << ','
            << (quantile_row ? "" : fixed(row.rate_pct, 2)) << ',' << (quantile_row ? "" : fixed(row.mc_se_pct, 2))
            << ',' << (row.quantile ? fixed(*row.quantile, 4) : "") << ',' << row.replicates << '\n';
    }
}

}  // namespace inar
