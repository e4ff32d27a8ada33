// fpp-lab: first-passage percolation experiment runner.
//
//   fpp-lab <kind> --config <path> [--seed N] [--trials N] [--out DIR] [--workers N]
//
// kinds: influence | fluctuation | coupling | ratio | validate
// exit codes: 0 ok, 1 deterministic invariant failure, 2 config error

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fpp/config.hpp"
#include "fpp/experiments.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    int64_t seed = -1;
    int64_t trials = -1;
    std::string out_dir;
    int workers = -1;
};

int run_kind(const std::string& kind, const CliArgs& args) {
    std::string text = "{}";
    if (!args.config_path.empty()) {
        std::ifstream f(args.config_path);
        if (!f) {
            std::cerr << "config error: cannot open '" << args.config_path << "'\n";
            return 2;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    fpp::ExperimentConfig cfg;
    try {
        cfg = fpp::parse_config(text, kind);
        if (args.seed >= 0) cfg.master_seed = uint64_t(args.seed);
        if (args.trials >= 0) cfg.trials = uint64_t(args.trials);
        if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
        if (args.workers >= 0) cfg.workers = args.workers;
        fpp::validate_config(cfg);
    } catch (const fpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        fpp::RunOutcome outcome = fpp::run_experiment(cfg);
        fpp::write_outcome(outcome, cfg.out_dir);
        for (const std::string& line : outcome.log_lines) std::cout << line << "\n";
        std::cout << "artifacts written to " << cfg.out_dir << " ("
                  << outcome.wall_seconds << " s)\n";
        return outcome.exit_code;
    } catch (const fpp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-passage percolation simulation lab"};
    app.require_subcommand(1);

    CliArgs args;
    std::string picked;
    for (const char* kind : {"influence", "fluctuation", "coupling", "ratio", "validate"}) {
        CLI::App* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
        sub->add_option("--config", args.config_path, "JSON config file");
        sub->add_option("--seed", args.seed, "override master_seed");
        sub->add_option("--trials", args.trials, "override trial count");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--workers", args.workers,
                        "worker threads (default: FPP_LAB_WORKERS or all cores)");
        sub->callback([kind, &picked]() { picked = kind; });
    }

    CLI11_PARSE(app, argc, argv);
    return run_kind(picked, args);
}
