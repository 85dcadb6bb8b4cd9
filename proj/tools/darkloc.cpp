// darkloc.cpp — command-line front end
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "darkloc/commands.hpp"
#include "darkloc/io.hpp"
#include "darkloc/parallel.hpp"

int main(int argc, char** argv) {
    using namespace darkloc;
    CLI::App app{"darkloc: photon transport through disordered qubit arrays in a waveguide"};
    app.set_version_flag("--version", io::version_string());
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::string> out, format;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;

    const std::pair<config::Command, const char*> commands[] = {
        {config::Command::dos, "density of states of the full Hamiltonian"},
        {config::Command::xi, "Lyapunov localization-length map xi(f, W)"},
        {config::Command::transmission, "single-realization transmission traces"},
        {config::Command::sweep, "ensemble xi_N(f, W) map for a short array"},
        {config::Command::scaling, "weak-disorder power-law fit of xi(W)"},
        {config::Command::dissipative, "peak xi_N with non-radiative decay"},
    };
    for (const auto& [cmd, help] : commands) {
        auto* sub = app.add_subcommand(config::command_name(cmd), help);
        sub->add_option("--config", config_path, "YAML config, or a previous output file")->required();
        sub->add_option("--out", out, "output path (default: run.output, else stdout)");
        sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "master seed, overrides run.seed");
        sub->add_option("--workers", workers, "worker threads (default: DARKLOC_WORKERS or all cores)")
            ->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(app, argc, argv);

    config::Command cmd{};
    for (const auto& [c, help] : commands)
        if (app.got_subcommand(config::command_name(c))) cmd = c;

    try {
        const auto cfg = cli::resolve_config(config_path, cmd, {out, format, seed});
        const std::size_t n_workers = parallel::resolve_workers(workers);
        return cli::run_command(cfg, n_workers, std::cout, std::cerr);
    } catch (const config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
