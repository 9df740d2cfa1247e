#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dzvoc::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_expectation_failed = 1,
    exit_usage = 2,
    exit_divergence = 3,
};

/// `params` are "key=value" overrides of the oscillator and gain defaults
/// (r, l, c, sigma, phi, r_s, omega0, i_gain, v_gain).
int cmd_stability(const std::vector<std::string>& params, std::ostream& out, std::ostream& err);

struct ImpulseOptions {
    std::string mode = "full";  ///< above, inside, below or full
    double duration = 2.0;
    double dt = 1e-5;
    std::optional<double> v0;
    std::filesystem::path out = "impulse.csv";
    std::vector<std::string> params;
};

int cmd_impulse(const ImpulseOptions& options, std::ostream& out, std::ostream& err);

/// Prints a built-in or file scenario as TOML (or JSON).
int cmd_show(const std::string& scenario, bool json, std::ostream& out, std::ostream& err);

struct RunOptions {
    std::string scenario;  ///< built-in name or config path
    std::optional<std::filesystem::path> out_dir;  ///< default: out/<scenario name>
    std::optional<double> dt;
    bool full_rate = false;
    bool switched_pv = false;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::filesystem::path dir;
    std::filesystem::path out_dir = "out";
    std::size_t jobs = 0;  ///< 0: hardware concurrency
    bool full_rate = false;
    bool switched_pv = false;
};

/// Runs every .toml/.json file in `dir` in parallel; each writes to
/// out_dir/<file stem>/. Returns the largest exit code of all runs.
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);

}  // namespace dzvoc::cli
