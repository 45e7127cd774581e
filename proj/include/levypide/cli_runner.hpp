#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levypide/config.hpp"
#include "levypide/feedback_shift.hpp"
#include "levypide/hjb_riccati.hpp"
#include "levypide/levy_measures.hpp"
#include "levypide/pide_solver.hpp"
#include "levypide/portfolio_alpha.hpp"

namespace levypide {

enum class Command { Price, Table1, Hedge, Alpha, Hjb, CheckMeasure };

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAssumption = 4;

struct Overrides {
    std::optional<int> grid_N, grid_M;
    std::optional<double> grid_L;
    std::optional<double> rho;
    std::optional<DeltaSign> delta_sign;
    std::optional<XiMode> xi_mode;
};

struct RunConfig {
    Command command = Command::Price;
    std::string config_path;
    std::string out_dir = ".";
    Overrides overrides;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;             ///< error text when exit_code != 0
    std::vector<std::string> files;  ///< data files written, metadata excluded
};

/// Parses the config, dispatches, writes data tables and a `<command>.meta` sidecar into out_dir.
/// Never throws; failures map to the exit codes above.
RunResult run(const RunConfig& cfg);

Command parse_command(const std::string& s);
DeltaSign parse_delta_sign(const std::string& s);
XiMode parse_xi_mode(const std::string& s);
std::string command_name(Command c);

/// Scenario building blocks, shared with the tests.
LevyMeasureSpec measure_from(const ConfigSection& s);
StrategyPtr strategy_from(const ConfigSection& s, double reference_level);
Contract contract_from(const Config& c);
PideGrid pide_grid_from(const Config& c, const Overrides& o);
PideProblem problem_from(const ConfigSection& scenario, const Contract& contract, const Overrides& o);
PortfolioProblem portfolio_from(const Config& c);

/// %.12g
std::string format_number(double v);

}  // namespace levypide
