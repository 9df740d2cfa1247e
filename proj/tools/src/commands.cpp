#include "dzvoc/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "dzvoc/cli/config_io.hpp"
#include "dzvoc/cli/report.hpp"
#include "dzvoc/cli/toml.hpp"
#include "dzvoc/stability.hpp"

namespace dzvoc::cli {

namespace {

struct ParamSet {
    OscillatorParams osc;
    FeedbackGains gains;
};

double parse_number(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("parameter '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

ParamSet parse_params(const std::vector<std::string>& params) {
    ParamSet p;
    for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const double v = parse_number(key, kv.substr(eq + 1));
        if (key == "r") p.osc.r = v;
        else if (key == "l") p.osc.l = v;
        else if (key == "c") p.osc.c = v;
        else if (key == "sigma") p.osc.sigma = v;
        else if (key == "phi") p.osc.phi = v;
        else if (key == "r_s") p.osc.r_s = v;
        else if (key == "omega0") p.osc.omega0 = v;
        else if (key == "i_gain") p.gains.i_gain = v;
        else if (key == "v_gain") p.gains.v_gain = v;
        else throw std::invalid_argument("unknown parameter '" + key + "'");
    }
    std::vector<std::string> problems = p.osc.violations(false);
    if (!(p.gains.i_gain > 0.0)) problems.push_back("i_gain must be positive");
    if (!(p.gains.v_gain > 0.0)) problems.push_back("v_gain must be positive");
    if (!problems.empty()) {
        std::string all;
        for (const auto& s : problems) all += (all.empty() ? "" : "; ") + s;
        throw std::invalid_argument(all);
    }
    return p;
}

void print_problems(std::ostream& err, const std::vector<std::string>& problems) {
    err << "invalid configuration:\n";
    for (const auto& p : problems) err << "  - " << p << '\n';
}

/// Outcome of one scenario run, with the console text it produced.
struct RunOutcome {
    int code = exit_ok;
    std::string out;
    std::string err;
};

RunOutcome run_config(ScenarioConfig config, const std::filesystem::path& out_dir, const RunOptions& opt) {
    RunOutcome result;
    std::ostringstream out;
    std::ostringstream err;
    if (opt.dt) config.sim.dt = *opt.dt;
    if (opt.full_rate) config.sim.decimation = 1;
    if (opt.switched_pv) {
        if (!config.pv.enabled) {
            err << config.name << ": --switched-pv needs a scenario with pv.enabled = true\n";
            return {exit_usage, out.str(), err.str()};
        }
        const std::size_t decimation = config.sim.decimation;
        enable_switched_pv(config);
        if (opt.full_rate) config.sim.decimation = decimation;
    }
    if (auto problems = validate(config); !problems.empty()) {
        print_problems(err, problems);
        return {exit_usage, out.str(), err.str()};
    }

    const auto start = std::chrono::steady_clock::now();
    RunResult run;
    try {
        run = run_scenario(build_sim_config(config), build_schedule(config), build_grid(config));
    } catch (const DivergenceError& e) {
        err << config.name << ": " << e.what() << '\n';
        return {exit_divergence, out.str(), err.str()};
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const RunSummary summary = summarize(config, run.metrics, runtime);

    std::filesystem::create_directories(out_dir);
    write_trace_csv(run.trace, out_dir / "trace.csv");
    {
        std::ofstream f(out_dir / "summary.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + (out_dir / "summary.json").string() + "'");
        f << summary_to_json(summary).dump(2) << '\n';
    }

    out << config.name << ": " << (summary.pass ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(2)
        << runtime << " s, " << run.trace.rows() << " rows) -> " << out_dir.string() << '\n';
    out.unsetf(std::ios::floatfield);
    out << std::setprecision(6);
    for (const auto& c : summary.checks) {
        out << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = ";
        if (c.measured) {
            out << *c.measured;
        } else {
            out << "n/a";
        }
        out << " (limit " << c.limit << ")\n";
    }
    result.code = summary.pass ? exit_ok : exit_expectation_failed;
    result.out = out.str();
    result.err = err.str();
    return result;
}

bool load_scenario(const std::string& name_or_path, ScenarioConfig& config, std::ostream& err) {
    try {
        config = resolve_scenario(name_or_path);
        return true;
    } catch (const ParseError& e) {
        err << e.what() << '\n';
    } catch (const ConfigError& e) {
        print_problems(err, e.problems());
    } catch (const std::exception& e) {
        err << e.what() << '\n';
    }
    return false;
}

}  // namespace

int cmd_stability(const std::vector<std::string>& params, std::ostream& out, std::ostream& err) {
    ParamSet p;
    try {
        p = parse_params(params);
    } catch (const std::invalid_argument& e) {
        err << "stability: " << e.what() << '\n';
        return exit_usage;
    }
    out << std::setprecision(6);
    out << "segment  beta_eff      lambda                        class\n";
    for (Segment s : {Segment::above, Segment::inside, Segment::below}) {
        const auto lin = linearize_segment(p.osc, p.gains, s);
        const auto [l1, l2] = eigenvalues(lin, p.osc);
        std::ostringstream lambda;
        lambda << std::setprecision(6);
        if (l1.im != 0.0) {
            lambda << l1.re << " +/- j" << std::abs(l1.im);
        } else {
            lambda << l1.re << ", " << l2.re;
        }
        out << std::left << std::setw(9) << to_string(s) << std::setw(14) << lin.beta_eff << std::setw(30)
            << lambda.str() << to_string(classify_stability(l1)) << '\n';
    }
    const auto report = validate_design(p.osc, p.gains);
    out << '\n';
    for (const auto& c : report.checks) {
        out << (c.pass ? "PASS  " : "FAIL  ") << c.rule << "  (" << c.detail << ")\n";
    }
    return report.all_pass() ? exit_ok : exit_expectation_failed;
}

int cmd_impulse(const ImpulseOptions& o, std::ostream& out, std::ostream& err) {
    std::vector<ResponseSample> samples;
    try {
        const ParamSet p = parse_params(o.params);
        if (o.mode == "full") {
            samples = nonlinear_impulse_response(p.osc, p.gains, o.duration, o.dt, o.v0.value_or(OscillatorState{}.v_osc));
        } else {
            const auto lin = linearize_segment(p.osc, p.gains, parse_segment(o.mode));
            samples = impulse_response(lin, p.osc, o.duration, o.dt, o.v0.value_or(1.0));
        }
    } catch (const std::invalid_argument& e) {
        err << "impulse: " << e.what() << '\n';
        return exit_usage;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
        err << "impulse: cannot write '" << o.out.string() << "'\n";
        return exit_usage;
    }
    f << std::setprecision(17) << "t,v_osc\r\n";
    for (const auto& s : samples) f << s.t << "," << s.v_osc << "\r\n";
    if (!f) {
        err << "impulse: error while writing '" << o.out.string() << "'\n";
        return exit_usage;
    }
    out << "wrote " << samples.size() << " samples to " << o.out.string() << '\n';
    return exit_ok;
}

int cmd_show(const std::string& scenario, bool json, std::ostream& out, std::ostream& err) {
    ScenarioConfig config;
    if (!load_scenario(scenario, config, err)) return exit_usage;
    out << serialize_config(config, json ? ConfigFormat::json : ConfigFormat::toml);
    return exit_ok;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    ScenarioConfig config;
    if (!load_scenario(options.scenario, config, err)) return exit_usage;
    const auto dir = options.out_dir.value_or(std::filesystem::path("out") / config.name);
    const RunOutcome r = run_config(std::move(config), dir, options);
    out << r.out;
    err << r.err;
    return r.code;
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(options.dir, ec)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".toml" || ext == ".json")) files.push_back(entry.path());
    }
    if (ec) {
        err << "sweep: cannot read directory '" << options.dir.string() << "': " << ec.message() << '\n';
        return exit_usage;
    }
    if (files.empty()) {
        err << "sweep: no .toml or .json scenarios in '" << options.dir.string() << "'\n";
        return exit_usage;
    }
    std::sort(files.begin(), files.end());

    std::vector<RunOutcome> outcomes(files.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min(files.size(), options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency()));
    RunOptions run_opt;
    run_opt.full_rate = options.full_rate;
    run_opt.switched_pv = options.switched_pv;

    auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            const auto& file = files[i];
            try {
                outcomes[i] = run_config(load_config(file), options.out_dir / file.stem(), run_opt);
            } catch (const ConfigError& e) {
                std::ostringstream msg;
                msg << file.string() << ":\n";
                print_problems(msg, e.problems());
                outcomes[i] = {exit_usage, "", msg.str()};
            } catch (const std::exception& e) {
                outcomes[i] = {exit_usage, "", std::string(e.what()) + "\n"};
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int code = exit_ok;
    for (const auto& o : outcomes) {
        out << o.out;
        err << o.err;
        code = std::max(code, o.code);
    }
    return code;
}

}  // namespace dzvoc::cli
