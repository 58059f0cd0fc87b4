#include "wishart/runner.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iostream>
#include <optional>

#include "json.hpp"
#include "wishart/metric.hpp"
#include "wishart/riccati.hpp"
#include "wishart/serialize.hpp"
#include "wishart/validate.hpp"

namespace wishart {

namespace {

SelfAdjointOperator parse_operator(const nlohmann::json& j, int dim) {
    if (!j.is_object()) throw ConfigParseError("operator entry must be an object");
    if (j.contains("type")) {
        const std::string type = j.at("type").get<std::string>();
        if (type == "identity") {
            return SelfAdjointOperator(dim, j.value("scale", 1.0));
        }
        if (type == "zero") return SelfAdjointOperator::zero(dim);
        if (type == "diagonal") {
            const auto values = j.at("values").get<std::vector<double>>();
            if (static_cast<int>(values.size()) != dim) {
                throw ConfigParseError("diagonal operator has wrong length");
            }
            return SelfAdjointOperator::from_diagonal(
                Eigen::Map<const Eigen::VectorXd>(values.data(), dim));
        }
        throw ConfigParseError("unknown operator type: " + type);
    }
    SelfAdjointOperator op = self_adjoint_from_json(j.dump());
    if (op.dim() != dim) throw ConfigParseError("operator dimension mismatch");
    return op;
}

TransformRegime regime_from_string(const std::string& name) {
    if (name == "laplace") return TransformRegime::LaplacePos;
    if (name == "fourier") return TransformRegime::FourierSigned;
    if (name == "diagonal") return TransformRegime::JointlyDiagonal;
    if (name == "mixed") return TransformRegime::MixedSmallT;
    if (name == "extended") return TransformRegime::ExtendedNegative;
    throw ConfigParseError("unknown probe regime: " + name);
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "exact-diagonal") return Scheme::ExactDiagonal;
    if (name == "euler-ou") return Scheme::EulerOU;
    if (name == "euler-direct") return Scheme::EulerDirect;
    throw ConfigParseError("unknown scheme: " + name);
}

bool on_grid(const std::vector<double>& grid, double t) {
    for (double g : grid) {
        if (std::abs(g - t) <= 1e-12 * std::max(1.0, std::abs(t))) return true;
    }
    return false;
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace

ExperimentConfig::ExperimentConfig(ModelParams m, InitialState x0)
    : model(std::move(m)), initial(std::move(x0)), t_grid{0.0, 1.0}, n_paths(1000), seed(1),
      scheme(Scheme::EulerOU), outputs("wishart-out") {}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> names = {"simulate", "transform", "validate",
                                                   "riccati-check", "metric"};
    return names;
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigParseError(e.what());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
    }

    try {
        if (!j.contains("model")) throw ConfigParseError("config needs a model object");
        ModelParams model = model_from_json(j.at("model").dump());

        InitialState initial = [&]() -> InitialState {
            if (!j.contains("initial")) return InitialState(PsdOperator::zero(model.dim), 0);
            const nlohmann::json& ji = j.at("initial");
            const SelfAdjointOperator op = parse_operator(ji.at("x0"), model.dim);
            const PsdOperator x0(op);
            const int declared = ji.value("declared_rank", model.dim);
            return InitialState(x0, declared);
        }();

        ExperimentConfig cfg(std::move(model), std::move(initial));
        if (j.contains("t_grid")) cfg.t_grid = j.at("t_grid").get<std::vector<double>>();
        cfg.n_paths = j.value("n_paths", cfg.n_paths);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("scheme")) {
            cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        }
        cfg.outputs = j.value("outputs", cfg.outputs);
        if (j.contains("suites")) {
            cfg.suites = j.at("suites").get<std::vector<std::string>>();
            for (const std::string& name : cfg.suites) {
                if (std::find(known_suites().begin(), known_suites().end(), name) ==
                    known_suites().end()) {
                    throw ConfigParseError("unknown suite: " + name);
                }
            }
        }

        int index = 0;
        if (j.contains("probes")) {
            for (const nlohmann::json& jp : j.at("probes")) {
                ProbeSpec probe{jp.value("id", "probe-" + std::to_string(index)),
                                TestFunctional(
                                    jp.contains("u")
                                        ? parse_operator(jp.at("u"), cfg.model.dim)
                                        : SelfAdjointOperator::zero(cfg.model.dim),
                                    jp.contains("v")
                                        ? parse_operator(jp.at("v"), cfg.model.dim)
                                        : SelfAdjointOperator::zero(cfg.model.dim),
                                    regime_from_string(jp.value("regime", "laplace"))),
                                jp.at("t").get<double>()};
                if (probe.t < 0.0) throw ConfigParseError("probe time must be >= 0");
                cfg.probes.push_back(std::move(probe));
                ++index;
            }
        }

        const bool wants_paths =
            std::find(cfg.suites.begin(), cfg.suites.end(), "validate") != cfg.suites.end();
        if (wants_paths) {
            for (const ProbeSpec& probe : cfg.probes) {
                if (!on_grid(cfg.t_grid, probe.t)) {
                    throw ConfigParseError("probe " + probe.id +
                                           " is off the simulation grid");
                }
            }
        }
        return cfg;
    } catch (const ConfigParseError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(std::string("config field error: ") + e.what());
    } catch (const Error& e) {
        throw ConfigParseError(std::string("config rejected: ") + e.what());
    }
}

namespace {

struct SuiteOutcome {
    bool pass = true;
    nlohmann::json metrics = nlohmann::json::object();
};

class SuiteRunner {
public:
    SuiteRunner(const ExperimentConfig& cfg) : cfg_(cfg) {}

    SuiteOutcome run(const std::string& name) {
        SuiteOutcome outcome;
        try {
            if (name == "simulate") run_simulate(outcome);
            else if (name == "transform") run_transform(outcome);
            else if (name == "validate") run_validate(outcome);
            else if (name == "riccati-check") run_riccati(outcome);
            else if (name == "metric") run_metric(outcome);
        } catch (const InadmissibleParameters&) {
            throw;
        } catch (const Error& e) {
            outcome.pass = false;
            outcome.metrics["error"] = e.what();
        }
        return outcome;
    }

private:
    const WishartPathSample& sample() {
        if (!sample_) {
            SimPlan plan(cfg_.model, cfg_.initial, cfg_.t_grid, cfg_.n_paths, cfg_.seed,
                         cfg_.scheme);
            sample_.emplace(simulate(plan));
        }
        return *sample_;
    }

    void run_simulate(SuiteOutcome& outcome) {
        const WishartPathSample& s = sample();
        s.export_csv(cfg_.outputs + "/paths.csv");
        const int final_index = static_cast<int>(cfg_.t_grid.size()) - 1;
        double mean_trace = 0.0;
        for (std::int64_t p = 0; p < cfg_.n_paths; ++p) {
            mean_trace += s.trace_state(p, final_index);
        }
        mean_trace /= static_cast<double>(cfg_.n_paths);
        outcome.metrics["n_paths"] = cfg_.n_paths;
        outcome.metrics["n_times"] = cfg_.t_grid.size();
        outcome.metrics["mean_trace_final"] = mean_trace;
        outcome.pass = std::isfinite(mean_trace);
    }

    void run_transform(SuiteOutcome& outcome) {
        std::vector<TransformCsvRow> rows;
        for (const ProbeSpec& probe : cfg_.probes) {
            const TransformResult r = evaluate(cfg_.model, cfg_.initial, probe.functional,
                                               probe.t);
            if (!std::isfinite(std::abs(r.value))) outcome.pass = false;
            if (probe.functional.regime == TransformRegime::LaplacePos &&
                !(r.value.real() > 0.0 && r.value.real() <= 1.0 + 1e-12)) {
                outcome.pass = false;
            }
            rows.push_back({probe.id, probe.t, r});
        }
        export_transforms_csv(rows, cfg_.outputs + "/transforms.csv");
        outcome.metrics["n_probes"] = rows.size();
    }

    void run_validate(SuiteOutcome& outcome) {
        const WishartPathSample& s = sample();
        std::vector<ComparisonReport> reports;
        reports.push_back(moment_check(s, cfg_.t_grid.back()));
        outcome.pass = reports.front().pass;

        std::vector<std::pair<TestFunctional, double>> probes;
        for (const ProbeSpec& probe : cfg_.probes) {
            probes.emplace_back(probe.functional, probe.t);
        }
        if (!probes.empty()) {
            FamilyCheck family = transform_family_check(s, probes);
            outcome.metrics["n_above_three"] = family.n_above_three;
            outcome.pass = outcome.pass && family.pass;
            for (auto& report : family.reports) reports.push_back(std::move(report));
        }

        if (s.has_y_states()) {
            const RankHistogram hist = rank_histogram(s);
            const std::int64_t violations =
                hist.violations(static_cast<int>(std::lround(cfg_.model.alpha)));
            outcome.metrics["rank_violations"] = violations;
            outcome.pass = outcome.pass && violations == 0;
        }

        double max_abs_z = 0.0;
        for (const ComparisonReport& r : reports) {
            max_abs_z = std::max(max_abs_z, std::abs(r.z_score));
        }
        outcome.metrics["n_checks"] = reports.size();
        outcome.metrics["max_abs_z"] = max_abs_z;
        export_comparisons_csv(reports, cfg_.outputs + "/validate_checks.csv");
        write_text_file(cfg_.outputs + "/validate_checks.json",
                        comparisons_to_json(reports) + "\n");
    }

    void run_riccati(SuiteOutcome& outcome) {
        PsdOperator b = PsdOperator(SelfAdjointOperator(cfg_.model.dim, 0.5));
        for (const ProbeSpec& probe : cfg_.probes) {
            if (probe.functional.regime == TransformRegime::LaplacePos) {
                b = PsdOperator(probe.functional.u);
                break;
            }
        }
        const double t_end = cfg_.t_grid.back() > 0.0 ? cfg_.t_grid.back() : 1.0;
        const int steps = std::max(200, static_cast<int>(t_end * 1000.0));

        const ComplexOperator b_complex(b, SelfAdjointOperator::zero(cfg_.model.dim));
        const RiccatiSolution numeric = riccati_integrate(cfg_.model, b_complex, t_end, steps);
        const Eigen::MatrixXd explicit_terminal = psi_laplace(cfg_.model, b, t_end).matrix();
        const double gap =
            (numeric.psi_values.back() - explicit_terminal.cast<std::complex<double>>())
                .norm();

        const PsiFamily family = [this](double s, const Eigen::MatrixXcd& b0) {
            return psi_laplace(cfg_.model, PsdOperator(Eigen::MatrixXd(b0.real())), s)
                .matrix()
                .cast<std::complex<double>>()
                .eval();
        };
        const double h = std::max(1e-5, 1e-4 * t_end);
        const double t_mid = std::max(2.0 * h, 0.5 * t_end);
        const double residual = riccati_residual(
            cfg_.model, family, b.matrix().cast<std::complex<double>>(), t_mid, h);

        outcome.metrics["terminal_gap"] = gap;
        outcome.metrics["residual"] = residual;
        outcome.metrics["steps"] = steps;
        outcome.pass = gap <= 1e-8 * (1.0 + explicit_terminal.norm()) && residual <= 1e-6;
        export_riccati_csv(numeric, cfg_.outputs + "/riccati.csv");
    }

    void run_metric(SuiteOutcome& outcome) {
        const int dim = cfg_.model.dim;
        const TestFamily family = canonical_test_family(dim, separation_depth(dim));
        std::vector<std::pair<std::string, double>> rows;

        const ConePoint start(cfg_.initial.x0, 0.0);
        for (double t : cfg_.t_grid) {
            const Eigen::MatrixXd et = semigroup_apply(cfg_.model.generator, t);
            const Eigen::MatrixXd mean =
                et.transpose() * cfg_.initial.x0.matrix() * et +
                cfg_.model.alpha * integrated_covariance(cfg_.model, t).qt.matrix();
            const double d = wstar_distance(start, ConePoint(PsdOperator(mean), 0.0), family);
            rows.emplace_back("distance-t=" + format_double(t), d);
            if (!std::isfinite(d)) outcome.pass = false;
        }

        const double t_end = cfg_.t_grid.back() > 0.0 ? cfg_.t_grid.back() : 1.0;
        const bool x0_zero = cfg_.initial.x0.matrix().cwiseAbs().maxCoeff() == 0.0;
        const PsdOperator x_base =
            x0_zero ? PsdOperator::identity(dim) : cfg_.initial.x0;
        const std::vector<double> scales = {0.0, 1.0, 2.0, 4.0, 8.0};
        const std::vector<double> decay = feller_decay_probe(
            cfg_.model, PsdOperator::identity(dim), 1.0, t_end, x_base, scales);
        for (std::size_t k = 0; k < scales.size(); ++k) {
            rows.emplace_back("decay-scale=" + format_double(scales[k]), decay[k]);
            if (k > 0 && !(decay[k] < decay[k - 1])) outcome.pass = false;
        }

        outcome.metrics["family_depth"] = family.pairs.size();
        outcome.metrics["n_rows"] = rows.size();
        export_metric_csv(rows, cfg_.outputs + "/metric.csv");
    }

    const ExperimentConfig& cfg_;
    std::optional<WishartPathSample> sample_;
};

} // namespace

int run_experiment(const std::string& config_path, const RunOptions& options) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (options.seed_override) cfg.seed = *options.seed_override;
        if (options.out_override) cfg.outputs = *options.out_override;
        if (options.threads) set_thread_count(*options.threads);

        std::vector<std::string> requested = cfg.suites;
        if (!options.suite_filter.empty()) {
            requested = options.suite_filter;
            for (const std::string& name : requested) {
                if (std::find(known_suites().begin(), known_suites().end(), name) ==
                    known_suites().end()) {
                    throw ConfigParseError("unknown suite: " + name);
                }
            }
        }

        ensure_directory(cfg.outputs);
        SuiteRunner runner(cfg);
        nlohmann::json suite_array = nlohmann::json::array();
        bool all_pass = true;
        for (const std::string& name : known_suites()) {
            if (std::find(requested.begin(), requested.end(), name) == requested.end()) {
                continue;
            }
            const SuiteOutcome outcome = runner.run(name);
            nlohmann::json entry = {{"name", name},
                                    {"pass", outcome.pass},
                                    {"metrics", outcome.metrics}};
            write_text_file(cfg.outputs + "/" + name + ".json", entry.dump(2) + "\n");
            suite_array.push_back(std::move(entry));
            all_pass = all_pass && outcome.pass;
        }

        // The hash identifies the experiment, not where its files land: the
        // output directory is dropped so the same config and seed hash the
        // same regardless of --out.
        nlohmann::json effective = nlohmann::json::parse(read_text_file(config_path));
        effective["seed"] = cfg.seed;
        effective.erase("outputs");
        effective["suites"] = requested;

        nlohmann::json summary;
        summary["suites"] = suite_array;
        summary["seed"] = cfg.seed;
        summary["config_hash"] = hex64(fnv1a_hash(effective.dump()));
        summary["generated_at"] = timestamp_utc();
        write_text_file(cfg.outputs + "/summary.json", summary.dump(2) + "\n");
        return all_pass ? 0 : 1;
    } catch (const ConfigParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InadmissibleParameters& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

} // namespace wishart
