#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wishart/model.hpp"
#include "wishart/simulate.hpp"
#include "wishart/transforms.hpp"

namespace wishart {

struct ProbeSpec {
    std::string id;
    TestFunctional functional;
    double t;
};

struct ExperimentConfig {
    ModelParams model;
    InitialState initial;
    std::vector<double> t_grid;
    std::int64_t n_paths;
    std::uint64_t seed;
    Scheme scheme;
    std::vector<ProbeSpec> probes;
    std::string outputs;
    std::vector<std::string> suites;

    ExperimentConfig(ModelParams m, InitialState x0);
};

// Parses and validates a config file; ConfigParseError on malformed input,
// InadmissibleParameters when a requested suite needs properties the model
// lacks (referenced probe times must lie on the simulation grid).
ExperimentConfig load_config(const std::string& path);

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<int> threads;
    std::vector<std::string> suite_filter;
};

// Known suites: simulate, transform, validate, riccati-check, metric.
const std::vector<std::string>& known_suites();

// Exit code contract: 0 all requested suites pass, 1 suite failure,
// 2 config parse error, 3 inadmissible parameters. Writes per-suite JSON,
// CSVs, and summary.json {"suites":[{"name","pass","metrics"}],"seed",
// "config_hash"} under the output directory. Identical configs reproduce
// byte-identical outputs apart from the generated_at stamp, which the hash
// excludes.
int run_experiment(const std::string& config_path, const RunOptions& options);

} // namespace wishart
