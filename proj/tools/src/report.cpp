#include "dzvoc/cli/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dzvoc::cli {

using nlohmann::json;

namespace {

std::string format_time(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

ExpectationCheck upper_bound_check(std::string name, std::optional<double> measured, double limit) {
    const bool pass = measured && *measured <= limit;
    return {std::move(name), measured, limit, pass};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_number(std::ostream& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
}

void write_field(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

/// Splits one CSV record; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) throw std::runtime_error("CSV line " + std::to_string(line_no) + ": unterminated quoted field");
    out.push_back(std::move(field));
    return out;
}

}  // namespace

std::vector<ExpectationCheck> evaluate_expectations(const ScenarioConfig& config, const ScenarioMetrics& m) {
    const auto& e = config.expect;
    std::vector<ExpectationCheck> out;

    if (e.max_settling_time) {
        for (const auto& s : m.settling) {
            if (s.label == "fault_on") continue;
            out.push_back(upper_bound_check("settling_time[" + s.label + "@" + format_time(s.event_time) + "]",
                                            s.settling_time, *e.max_settling_time));
        }
    }
    if (e.share_tolerance) {
        double total = 0.0;
        for (const auto& u : config.units) total += u.capacity;
        for (const auto& w : m.shares) {
            for (std::size_t k = 0; k < w.shares.size() && k < config.units.size(); ++k) {
                const double error = std::abs(w.shares[k] - config.units[k].capacity / total);
                out.push_back(upper_bound_check("share_error[" + config.units[k].name + "," + format_time(w.t0) +
                                                    "-" + format_time(w.t1) + "]",
                                                error, *e.share_tolerance));
            }
        }
        if (m.shares.empty()) out.push_back({"share_error", std::nullopt, *e.share_tolerance, false});
    }
    if (e.max_fault_rms_pu) {
        std::optional<double> pu;
        if (m.fault_max_rms) pu = *m.fault_max_rms / config.v_nominal_rms;
        out.push_back(upper_bound_check("fault_rms_pu", pu, *e.max_fault_rms_pu));
    }
    if (e.max_frequency_deviation) {
        out.push_back(
            upper_bound_check("frequency_deviation", m.max_frequency_deviation, *e.max_frequency_deviation));
    }
    if (e.max_power_balance_residual) {
        out.push_back(upper_bound_check("power_balance_residual", m.max_power_balance_residual,
                                        *e.max_power_balance_residual));
    }
    if (e.max_pv_tracking_error) {
        out.push_back(upper_bound_check("pv_tracking_error", m.max_pv_tracking_error, *e.max_pv_tracking_error));
    }
    for (const auto& want : e.power_steps) {
        std::optional<double> measured;
        for (const auto& step : m.power_steps) {
            if (step.source != want.source || std::abs(step.event_time - want.time) > 1e-9) continue;
            measured = want.horizon == PowerStepExpectation::Horizon::settled ? step.settled_delta
                                                                               : step.one_cycle_delta;
        }
        ExpectationCheck check{"power_step[" + want.source + "@" + format_time(want.time) + "," +
                                   std::string(to_string(want.horizon)) + "]",
                               measured, want.tolerance, false};
        check.pass = measured && std::abs(*measured - want.delta) <= want.tolerance;
        out.push_back(std::move(check));
    }
    return out;
}

RunSummary summarize(const ScenarioConfig& config, const ScenarioMetrics& metrics, double runtime_s) {
    RunSummary s{config.name, metrics, evaluate_expectations(config, metrics), true, runtime_s};
    for (const auto& c : s.checks) s.pass = s.pass && c.pass;
    return s;
}

json metrics_to_json(const ScenarioMetrics& m) {
    json settling = json::array();
    for (const auto& s : m.settling) {
        settling.push_back(
            {{"event", s.label}, {"time", s.event_time}, {"settling_time", optional_number(s.settling_time)}});
    }
    json shares = json::array();
    for (const auto& w : m.shares) {
        shares.push_back({{"t0", w.t0}, {"t1", w.t1}, {"mean_power", w.mean_power}, {"shares", w.shares}});
    }
    json steps = json::array();
    for (const auto& p : m.power_steps) {
        steps.push_back({{"event", p.label},
                         {"time", p.event_time},
                         {"source", p.source},
                         {"settled_delta", optional_number(p.settled_delta)},
                         {"one_cycle_delta", optional_number(p.one_cycle_delta)}});
    }
    return {{"settling", settling},
            {"shares", shares},
            {"power_steps", steps},
            {"fault_min_rms", optional_number(m.fault_min_rms)},
            {"fault_max_rms", optional_number(m.fault_max_rms)},
            {"max_frequency_deviation", m.max_frequency_deviation},
            {"max_power_balance_residual", m.max_power_balance_residual},
            {"max_pv_tracking_error", optional_number(m.max_pv_tracking_error)}};
}

json summary_to_json(const RunSummary& s, bool include_runtime) {
    json checks = json::array();
    for (const auto& c : s.checks) {
        checks.push_back(
            {{"name", c.name}, {"measured", optional_number(c.measured)}, {"limit", c.limit}, {"pass", c.pass}});
    }
    json out = {{"scenario", s.scenario}, {"metrics", metrics_to_json(s.metrics)}, {"expectations", checks},
                {"pass", s.pass}};
    if (include_runtime) out["runtime_s"] = s.runtime_s;
    return out;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
    const auto& names = trace.columns();
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) out << ',';
        write_field(out, names[j]);
    }
    out << "\r\n";
    for (std::size_t i = 0; i < trace.rows(); ++i) {
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (j) out << ',';
            write_number(out, trace.column(j)[i]);
        }
        out << "\r\n";
    }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_trace_csv(trace, out);
    if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

Trace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("CSV is empty");
    Trace trace(split_record(line, 1));
    const std::size_t width = trace.columns().size();
    std::vector<double> row(width);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_record(line, line_no);
        if (fields.size() != width) {
            throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < width; ++j) {
            const auto& f = fields[j];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw std::runtime_error("CSV line " + std::to_string(line_no) + ": malformed number '" + f + "'");
            }
        }
        trace.append(row);
    }
    return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_trace_csv(in);
}

}  // namespace dzvoc::cli
