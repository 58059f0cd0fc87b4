#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wishart/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Wishart process laboratory: path simulation, closed-form transforms, "
                 "Riccati checks, and Monte Carlo validation suites"};

    std::string config_path;
    app.add_option("--config", config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    std::string out_dir;
    CLI::Option* out_opt =
        app.add_option("--out", out_dir, "override the configured output directory");
    int threads = 0;
    CLI::Option* threads_opt =
        app.add_option("--threads", threads, "worker threads for the path loop (0 = hardware)")
            ->check(CLI::NonNegativeNumber);
    std::vector<std::string> suites;
    app.add_option("--suite", suites, "run only the named suites (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    wishart::RunOptions options;
    if (seed_opt->count() > 0) options.seed_override = seed;
    if (out_opt->count() > 0) options.out_override = out_dir;
    if (threads_opt->count() > 0) {
        options.threads = threads;
    } else if (const char* env = std::getenv("WISHART_LAB_THREADS")) {
        options.threads = std::atoi(env);
    }
    options.suite_filter = suites;
    return wishart::run_experiment(config_path, options);
}
