#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "levypide/cli_runner.hpp"
#include "levypide/errors.hpp"

using namespace levypide;

int main(int argc, char** argv) {
    CLI::App app{"Levy-jump PIDE option pricing, hedging and Riccati HJB portfolio solver"};
    app.require_subcommand(1);

    std::string config, out = ".";
    std::optional<int> grid_N, grid_M;
    std::optional<double> grid_L, rho;
    std::string delta_sign, xi_mode;

    const std::pair<const char*, const char*> commands[] = {
        {"price", "Price the [scenario] sections of a config on its [spots]"},
        {"table1", "Six-column put price table with ordering checks and a deviation report"},
        {"hedge", "Variance-minimising hedge ratios, optionally with large-trader feedback"},
        {"alpha", "Markowitz value function alpha(phi), its slope and supports"},
        {"hjb", "Riccati-transformed HJB profiles, weights and a-priori bounds"},
        {"check-measure", "Admissibility and martingale checks for [measure] sections"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "Scenario config file")->required();
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--grid-N", grid_N, "Space steps of the PIDE grid (even)");
        sub->add_option("--grid-M", grid_M, "Time steps of the PIDE grid");
        sub->add_option("--grid-L", grid_L, "Half-width of the log-price domain");
        sub->add_option("--rho", rho, "Large-trader impact rho")->check(CLI::NonNegativeNumber);
        sub->add_option("--delta-sign", delta_sign, "Sign convention of the drift correction")
            ->check(CLI::IsMember({"plus", "minus"}));
        sub->add_option("--xi-mode", xi_mode, "Shift function evaluation")
            ->check(CLI::IsMember({"exact", "first-order", "no-ezfactor"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    RunConfig rc;
    rc.command = parse_command(app.get_subcommands().front()->get_name());
    rc.config_path = config;
    rc.out_dir = out;
    rc.overrides.grid_N = grid_N;
    rc.overrides.grid_M = grid_M;
    rc.overrides.grid_L = grid_L;
    rc.overrides.rho = rho;
    if (!delta_sign.empty()) rc.overrides.delta_sign = parse_delta_sign(delta_sign);
    if (!xi_mode.empty()) rc.overrides.xi_mode = parse_xi_mode(xi_mode);

    const RunResult res = run(rc);
    if (res.exit_code != kExitOk) {
        std::cerr << "levypide " << command_name(rc.command) << ": " << res.message << '\n';
        return res.exit_code;
    }
    for (const auto& f : res.files) std::cout << f << '\n';
    return kExitOk;
}
