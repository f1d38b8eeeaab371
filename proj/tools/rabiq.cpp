#include "rabiq/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Quench dynamics of the Rabi model normal phase under quenched disorder"};
    app.require_subcommand(1);

    rabiq::RunOptions options;
    std::string config_path;
    std::uint64_t seed = 0;
    int table_id = 0;
    std::string fit_input;
    std::string output_dir;

    app.add_option("--config", config_path, "YAML experiment config")->check(CLI::ExistingFile);
    app.add_option("--jobs", options.jobs, "worker threads (0: all cores)");
    auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed, overrides the config");
    app.add_flag("--no-cache", options.no_cache, "neither read nor write cached results");
    auto* out_opt = app.add_option("--output-dir", output_dir, "overrides output_dir");
    app.fallthrough();

    const std::pair<rabiq::Command, const char*> commands[] = {
        {rabiq::Command::simulate, "one quench: final state and residual energy"},
        {rabiq::Command::ensemble, "disorder-averaged residual energy on a grid of omega_tau"},
        {rabiq::Command::fit, "power-law fit of a CSV of residual energies"},
        {rabiq::Command::table, "reproduce a scaling-exponent table"},
        {rabiq::Command::predict, "closed-form APT and Kibble-Zurek predictions"},
        {rabiq::Command::verify, "run the invariant suite"},
    };
    CLI::Option* id_opt = nullptr;
    CLI::Option* input_opt = nullptr;
    for (const auto& [command, help] : commands) {
        auto* sub = app.add_subcommand(rabiq::command_name(command), help);
        sub->fallthrough();
        sub->callback([&options, command = command] { options.command = command; });
        if (command == rabiq::Command::table) {
            id_opt = sub->add_option("--id", table_id, "table number")->check(CLI::Range(1, 3));
        }
        if (command == rabiq::Command::fit) {
            input_opt = sub->add_option("--input", fit_input, "CSV with omega_tau and mean_Er");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!config_path.empty()) {
        options.config_path = config_path;
    }
    if (seed_opt->count() > 0) {
        options.seed = seed;
    }
    if (id_opt->count() > 0) {
        options.table_id = table_id;
    }
    if (input_opt->count() > 0) {
        options.fit_input = fit_input;
    }
    if (out_opt->count() > 0) {
        options.output_dir = output_dir;
    }
    return rabiq::run(options, std::cout, std::cerr);
}
