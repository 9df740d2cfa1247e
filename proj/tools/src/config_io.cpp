#include "dzvoc/cli/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dzvoc/cli/toml.hpp"

namespace dzvoc::cli {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) out += (out.empty() ? "" : "\n") + p;
    return out;
}

/// Reads one table, remembering which keys were consumed.
class TableReader {
public:
    TableReader(const json& doc, std::string path, std::vector<std::string>& problems)
        : doc_(doc), path_(std::move(path)), problems_(problems) {
        if (!doc_.is_object()) problems_.push_back(where() + " must be a table");
    }

    ~TableReader() {
        if (!doc_.is_object()) return;
        for (const auto& [key, v] : doc_.items()) {
            if (!used_.count(key)) problems_.push_back("unknown key '" + qualified(key) + "'");
        }
    }

    TableReader(const TableReader&) = delete;
    TableReader& operator=(const TableReader&) = delete;

    const json* find(const std::string& key) {
        used_.insert(key);
        if (!doc_.is_object() || !doc_.contains(key)) return nullptr;
        return &doc_.at(key);
    }

    void read(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                problems_.push_back(qualified(key) + " must be a number");
            }
        }
    }

    void read(const std::string& key, std::optional<double>& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                problems_.push_back(qualified(key) + " must be a number");
            }
        }
    }

    void read(const std::string& key, std::size_t& out) {
        if (const json* v = find(key)) {
            if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
                out = v->get<std::size_t>();
            } else {
                problems_.push_back(qualified(key) + " must be a non-negative integer");
            }
        }
    }

    void read(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (v->is_boolean()) {
                out = v->get<bool>();
            } else {
                problems_.push_back(qualified(key) + " must be true or false");
            }
        }
    }

    void read(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (v->is_string()) {
                out = v->get<std::string>();
            } else {
                problems_.push_back(qualified(key) + " must be a string");
            }
        }
    }

    template <typename Enum, typename Parse>
    void read_enum(const std::string& key, Enum& out, Parse parse) {
        std::string name;
        if (!find(key)) return;
        read(key, name);
        if (name.empty()) return;
        try {
            out = parse(name);
        } catch (const std::invalid_argument& e) {
            problems_.push_back(qualified(key) + ": " + e.what());
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "document" : "[" + path_ + "]"; }

private:
    const json& doc_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> used_;
};

/// Array of tables under `key`; calls fn(reader, index) for each element.
template <typename Fn>
void read_table_array(TableReader& parent, const std::string& key, std::vector<std::string>& problems, Fn fn) {
    const json* arr = parent.find(key);
    if (!arr) return;
    if (!arr->is_array()) {
        problems.push_back(parent.qualified(key) + " must be an array of tables");
        return;
    }
    for (std::size_t i = 0; i < arr->size(); ++i) {
        TableReader r((*arr)[i], parent.qualified(key) + "[" + std::to_string(i) + "]", problems);
        fn(r);
    }
}

template <typename Fn>
void read_table(TableReader& parent, const std::string& key, std::vector<std::string>& problems, Fn fn) {
    if (const json* t = parent.find(key)) {
        TableReader r(*t, parent.qualified(key), problems);
        fn(r);
    }
}

void put(json& obj, const char* key, const std::optional<double>& v) {
    if (v) obj[key] = *v;
}

ConfigFormat format_of(const std::filesystem::path& path) {
    return path.extension() == ".json" ? ConfigFormat::json : ConfigFormat::toml;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_lines(problems)), problems_(std::move(problems)) {}

json config_to_json(const ScenarioConfig& c) {
    json doc = json::object();
    doc["name"] = c.name;
    doc["oscillator"] = {{"r", c.oscillator.r},         {"l", c.oscillator.l},     {"c", c.oscillator.c},
                         {"sigma", c.oscillator.sigma}, {"phi", c.oscillator.phi}, {"r_s", c.oscillator.r_s},
                         {"omega0", c.oscillator.omega0}};
    doc["gains"] = {{"i_gain", c.i_gain}, {"v_gain", c.v_gain}};
    doc["filter"] = {{"r_f", c.filter.r_f}, {"l_f", c.filter.l_f}, {"c_f", c.filter.c_f}};
    doc["vrl"] = {{"kp", c.vrl.kp},
                  {"ki", c.vrl.ki},
                  {"v_ref_rms", c.vrl.v_ref_rms},
                  {"scale_min", c.vrl.scale_min},
                  {"scale_max", c.vrl.scale_max},
                  {"fault_guard", c.vrl.fault_guard}};
    doc["grid"] = {{"load_power", c.load_power}, {"v_nominal_rms", c.v_nominal_rms}};

    json units = json::array();
    for (const auto& u : c.units) units.push_back({{"name", u.name}, {"capacity", u.capacity}});
    doc["units"] = units;

    doc["pv"] = {{"enabled", c.pv.enabled},
                 {"power", c.pv.power},
                 {"v_dc", c.pv.v_dc},
                 {"band", c.pv.band},
                 {"l", c.pv.l},
                 {"r", c.pv.r},
                 {"connected", c.pv.connected},
                 {"mode", std::string(to_string(c.pv.mode))}};

    json events = json::array();
    for (const auto& e : c.events) {
        events.push_back({{"time", e.time}, {"kind", std::string(to_string(e.event.kind))}, {"value", e.event.value}});
    }
    doc["events"] = events;

    doc["sim"] = {{"dt", c.sim.dt},
                  {"t_end", c.sim.t_end},
                  {"integrator", std::string(to_string(c.sim.integrator))},
                  {"decimation", c.sim.decimation},
                  {"startup", c.sim.startup},
                  {"divergence_limit", c.sim.divergence_limit},
                  {"vrl_measurement", std::string(to_string(c.sim.vrl_measurement))}};

    json expect = json::object();
    put(expect, "max_settling_time", c.expect.max_settling_time);
    put(expect, "share_tolerance", c.expect.share_tolerance);
    put(expect, "max_fault_rms_pu", c.expect.max_fault_rms_pu);
    put(expect, "max_frequency_deviation", c.expect.max_frequency_deviation);
    put(expect, "max_power_balance_residual", c.expect.max_power_balance_residual);
    put(expect, "max_pv_tracking_error", c.expect.max_pv_tracking_error);
    if (!c.expect.power_steps.empty()) {
        json steps = json::array();
        for (const auto& p : c.expect.power_steps) {
            steps.push_back({{"source", p.source},
                             {"time", p.time},
                             {"delta", p.delta},
                             {"tolerance", p.tolerance},
                             {"horizon", std::string(to_string(p.horizon))}});
        }
        expect["power_steps"] = steps;
    }
    doc["expect"] = expect;
    return doc;
}

ScenarioConfig config_from_json(const json& doc) {
    ScenarioConfig c;
    std::vector<std::string> problems;
    {
        TableReader root(doc, "", problems);
        root.read("name", c.name);
        read_table(root, "oscillator", problems, [&](TableReader& t) {
            t.read("r", c.oscillator.r);
            t.read("l", c.oscillator.l);
            t.read("c", c.oscillator.c);
            t.read("sigma", c.oscillator.sigma);
            t.read("phi", c.oscillator.phi);
            t.read("r_s", c.oscillator.r_s);
            t.read("omega0", c.oscillator.omega0);
        });
        read_table(root, "gains", problems, [&](TableReader& t) {
            t.read("i_gain", c.i_gain);
            t.read("v_gain", c.v_gain);
        });
        read_table(root, "filter", problems, [&](TableReader& t) {
            t.read("r_f", c.filter.r_f);
            t.read("l_f", c.filter.l_f);
            t.read("c_f", c.filter.c_f);
        });
        read_table(root, "vrl", problems, [&](TableReader& t) {
            t.read("kp", c.vrl.kp);
            t.read("ki", c.vrl.ki);
            t.read("v_ref_rms", c.vrl.v_ref_rms);
            t.read("scale_min", c.vrl.scale_min);
            t.read("scale_max", c.vrl.scale_max);
            t.read("fault_guard", c.vrl.fault_guard);
        });
        read_table(root, "grid", problems, [&](TableReader& t) {
            t.read("load_power", c.load_power);
            t.read("v_nominal_rms", c.v_nominal_rms);
        });
        if (root.find("units")) c.units.clear();
        read_table_array(root, "units", problems, [&](TableReader& t) {
            UnitConfig u;
            t.read("name", u.name);
            t.read("capacity", u.capacity);
            c.units.push_back(u);
        });
        read_table(root, "pv", problems, [&](TableReader& t) {
            t.read("enabled", c.pv.enabled);
            t.read("power", c.pv.power);
            t.read("v_dc", c.pv.v_dc);
            t.read("band", c.pv.band);
            t.read("l", c.pv.l);
            t.read("r", c.pv.r);
            t.read("connected", c.pv.connected);
            t.read_enum("mode", c.pv.mode, parse_pv_mode);
        });
        read_table_array(root, "events", problems, [&](TableReader& t) {
            TimedEvent e;
            if (!t.find("kind")) problems.push_back(t.qualified("kind") + " is required");
            if (!t.find("time")) problems.push_back(t.qualified("time") + " is required");
            t.read("time", e.time);
            t.read_enum("kind", e.event.kind, parse_event_kind);
            t.read("value", e.event.value);
            c.events.push_back(e);
        });
        read_table(root, "sim", problems, [&](TableReader& t) {
            t.read("dt", c.sim.dt);
            t.read("t_end", c.sim.t_end);
            t.read_enum("integrator", c.sim.integrator, parse_integrator);
            t.read("decimation", c.sim.decimation);
            t.read("startup", c.sim.startup);
            t.read("divergence_limit", c.sim.divergence_limit);
            t.read_enum("vrl_measurement", c.sim.vrl_measurement, parse_vrl_measurement);
        });
        read_table(root, "expect", problems, [&](TableReader& t) {
            t.read("max_settling_time", c.expect.max_settling_time);
            t.read("share_tolerance", c.expect.share_tolerance);
            t.read("max_fault_rms_pu", c.expect.max_fault_rms_pu);
            t.read("max_frequency_deviation", c.expect.max_frequency_deviation);
            t.read("max_power_balance_residual", c.expect.max_power_balance_residual);
            t.read("max_pv_tracking_error", c.expect.max_pv_tracking_error);
            read_table_array(t, "power_steps", problems, [&](TableReader& s) {
                PowerStepExpectation p;
                s.read("source", p.source);
                s.read("time", p.time);
                s.read("delta", p.delta);
                s.read("tolerance", p.tolerance);
                s.read_enum("horizon", p.horizon, parse_horizon);
                c.expect.power_steps.push_back(p);
            });
        });
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

std::string serialize_config(const ScenarioConfig& config, ConfigFormat format) {
    const json doc = config_to_json(config);
    return format == ConfigFormat::json ? doc.dump(2) + "\n" : to_toml(doc);
}

ScenarioConfig parse_config(std::string_view text, ConfigFormat format) {
    if (format == ConfigFormat::toml) return config_from_json(parse_toml(text));
    try {
        return config_from_json(json::parse(text));
    } catch (const json::parse_error& e) {
        // byte offset → line number
        const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
        const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n')) + 1;
        throw ParseError(line, e.what());
    }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    ScenarioConfig config;
    try {
        config = parse_config(text.str(), format_of(path));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.message(), path.string());
    }
    if (auto problems = validate(config); !problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

void save_config(const ScenarioConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write scenario file '" + path.string() + "'");
    out << serialize_config(config, format_of(path));
    if (!out) throw std::runtime_error("error while writing '" + path.string() + "'");
}

ScenarioConfig resolve_scenario(const std::string& name_or_path) {
    for (const auto& name : builtin_names()) {
        if (name == name_or_path) return builtin_scenario(name);
    }
    return load_config(name_or_path);
}

}  // namespace dzvoc::cli
