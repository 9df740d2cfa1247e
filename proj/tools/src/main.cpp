#include <iostream>

#include <CLI11.hpp>

#include "dzvoc/cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace dzvoc::cli;

    CLI::App app{"Dead-zone virtual oscillator microgrid simulator"};
    app.require_subcommand(0, 1);

    std::string sweep_dir;
    SweepOptions sweep;
    app.add_option("--sweep", sweep_dir, "Run every .toml/.json scenario in a directory in parallel");
    app.add_option("--jobs", sweep.jobs, "Parallel workers for --sweep (0: all cores)");
    app.add_option("--out", sweep.out_dir, "Output directory for --sweep");
    app.add_flag("--full-rate", sweep.full_rate, "Record every step (--sweep)");
    app.add_flag("--switched-pv", sweep.switched_pv, "Switched hysteresis PV inverter (--sweep)");

    std::vector<std::string> stability_params;
    auto* stability = app.add_subcommand("stability", "Segment eigenvalues and design-rule checks");
    stability->add_option("--param", stability_params, "Override a parameter, key=value")->allow_extra_args(false);

    ImpulseOptions impulse;
    auto* imp = app.add_subcommand("impulse", "Oscillator impulse response as CSV (t, v_osc)");
    imp->add_option("--mode", impulse.mode, "above, inside, below or full")
        ->check(CLI::IsMember({"above", "inside", "below", "full"}));
    imp->add_option("--duration", impulse.duration, "Seconds");
    imp->add_option("--dt", impulse.dt, "Step in seconds, at most 1e-4");
    imp->add_option("--v0", impulse.v0, "Initial v_osc");
    imp->add_option("--out", impulse.out, "Output CSV path");
    imp->add_option("--param", impulse.params, "Override a parameter, key=value")->allow_extra_args(false);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a built-in scenario or a scenario file");
    run_cmd->add_option("scenario", run.scenario, "paper-a, paper-b, paper-c or a .toml/.json path")->required();
    run_cmd->add_option("--out", run.out_dir, "Output directory (default out/<name>)");
    run_cmd->add_option("--dt", run.dt, "Override the time step");
    run_cmd->add_flag("--full-rate", run.full_rate, "Record every step");
    run_cmd->add_flag("--switched-pv", run.switched_pv, "Switched hysteresis PV inverter");

    std::string show_name;
    bool show_json = false;
    auto* show = app.add_subcommand("show", "Print a scenario as TOML");
    show->add_option("scenario", show_name, "Built-in name or scenario file")->required();
    show->add_flag("--json", show_json, "Print JSON instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*stability) return cmd_stability(stability_params, std::cout, std::cerr);
        if (*imp) return cmd_impulse(impulse, std::cout, std::cerr);
        if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
        if (*show) return cmd_show(show_name, show_json, std::cout, std::cerr);
        if (!sweep_dir.empty()) {
            sweep.dir = sweep_dir;
            return cmd_sweep(sweep, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    std::cerr << app.help();
    return exit_usage;
}
