// qfp_main.cpp — Batch driver: run, validate and list scenario configurations.
//
// Exit codes: 0 success, 1 an asserted invariant failed, 2 configuration or usage error.

#include "qfp/config.hpp"
#include "qfp/runner.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Weak-coupling generator toolkit: scenario batch driver"};
    app.set_version_flag("--version", qfp::kToolVersion);
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run a scenario and write its CSV table and JSON summary");
    run->add_option("config", config, "Config file, or preset:NAME")->required();
    auto* out_opt = run->add_option("--out-dir", out_dir, "Output directory")->envname("QFP_OUT_DIR");
    run->add_option("--threads", threads, "Worker threads for the per-lambda jobs")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");

    auto* validate = app.add_subcommand("validate", "Parse and check a config without running numerics");
    validate->add_option("config", config, "Config file, or preset:NAME")->required();

    auto* presets = app.add_subcommand("presets", "Built-in scenario presets");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string preset_name;
    auto* show = presets->add_subcommand("show", "Print a preset's config text");
    show->add_option("name", preset_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*list) {
            for (const auto& n : qfp::preset_names()) std::cout << n << '\n';
            return 0;
        }
        if (*show) {
            try {
                std::cout << qfp::preset_text(preset_name);
            } catch (const std::out_of_range&) {
                std::cerr << "error: unknown preset '" << preset_name << "'\n";
                return 2;
            }
            return 0;
        }
        const qfp::ScenarioConfig cfg = qfp::load_config(config);
        if (*validate) {
            std::cout << "ok\n";
            return 0;
        }
        qfp::RunOptions opts;
        opts.out_dir = *out_opt ? out_dir : ".";
        opts.threads = threads;
        if (*seed_opt) opts.seed = seed;
        const qfp::RunResult r = qfp::run_scenario(cfg, opts);
        std::cout << r.csv_path << '\n' << r.json_path << '\n';
        if (r.exit_code != 0) std::cerr << "invariant failure; witnesses in " << r.json_path << '\n';
        return r.exit_code;
    } catch (const qfp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const qfp::ContractViolation& e) {
        std::cerr << "error: " << e.what() << " (witness " << e.witness() << ")\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
