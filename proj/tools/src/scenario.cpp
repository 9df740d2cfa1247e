#include "dzvoc/cli/scenario.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dzvoc/stability.hpp"

namespace dzvoc::cli {

namespace {

void check_positive(std::vector<std::string>& out, const std::string& name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << name << " must be positive and finite (got " << value << ")";
        out.push_back(msg.str());
    }
}

FeedbackGains gains_of(const ScenarioConfig& c) { return {c.i_gain, c.v_gain}; }

ScenarioConfig three_unit_grid(std::string name) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.units = {{"inv1", 1.0}, {"inv2", 1.0 / 2.0}, {"inv3", 1.0 / 3.0}};
    c.load_power = 8000.0;
    return c;
}

}  // namespace

std::string_view to_string(PowerStepExpectation::Horizon h) {
    return h == PowerStepExpectation::Horizon::settled ? "settled" : "cycle";
}

PowerStepExpectation::Horizon parse_horizon(std::string_view name) {
    if (name == "settled") return PowerStepExpectation::Horizon::settled;
    if (name == "cycle") return PowerStepExpectation::Horizon::cycle;
    throw std::invalid_argument("unknown power step horizon '" + std::string(name) + "' (expected settled or cycle)");
}

std::vector<std::string> validate(const ScenarioConfig& c) {
    std::vector<std::string> out;
    const OscillatorParams osc = c.oscillator.params();
    for (auto& v : osc.violations(false)) out.push_back("oscillator." + v);
    if (out.empty()) {
        for (const auto& check : validate_design(osc, gains_of(c)).checks) {
            if (!check.pass) out.push_back("design rule '" + check.rule + "' failed: " + check.detail);
        }
    }
    check_positive(out, "gains.i_gain", c.i_gain);
    check_positive(out, "gains.v_gain", c.v_gain);
    for (auto& v : c.filter.violations()) out.push_back("filter." + v);

    check_positive(out, "vrl.v_ref_rms", c.vrl.v_ref_rms);
    if (!(c.vrl.kp >= 0.0) || !(c.vrl.ki >= 0.0)) out.push_back("vrl.kp and vrl.ki must be non-negative");
    if (!(c.vrl.scale_min > 0.0) || !(c.vrl.scale_min <= 1.0) || !(c.vrl.scale_max >= 1.0)) {
        out.push_back("vrl limits must satisfy 0 < scale_min <= 1 <= scale_max");
    }

    if (c.units.empty()) out.push_back("at least one grid-forming unit is required");
    for (std::size_t k = 0; k < c.units.size(); ++k) {
        const auto& u = c.units[k];
        if (u.name.empty()) out.push_back("units[" + std::to_string(k) + "].name must not be empty");
        if (!(u.capacity > 0.0) || u.capacity > 1.0) {
            std::ostringstream msg;
            msg << "units[" << k << "].capacity must be in (0, 1] (got " << u.capacity << ")";
            out.push_back(msg.str());
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (c.units[j].name == u.name) out.push_back("duplicate unit name '" + u.name + "'");
        }
    }
    check_positive(out, "grid.load_power", c.load_power);
    check_positive(out, "grid.v_nominal_rms", c.v_nominal_rms);

    if (c.pv.enabled) {
        if (!(c.pv.power >= 0.0)) out.push_back("pv.power must be non-negative");
        check_positive(out, "pv.v_dc", c.pv.v_dc);
        check_positive(out, "pv.band", c.pv.band);
        check_positive(out, "pv.l", c.pv.l);
        if (!(c.pv.r >= 0.0)) out.push_back("pv.r must be non-negative");
    }

    double load = c.load_power;
    double previous = 0.0;
    for (std::size_t k = 0; k < c.events.size(); ++k) {
        const auto& e = c.events[k];
        const std::string where = "events[" + std::to_string(k) + "]";
        if (!(e.time >= 0.0) || e.time > c.sim.t_end) out.push_back(where + ".time must lie in [0, t_end]");
        if (e.time < previous) out.push_back(where + ".time must not decrease");
        previous = e.time;
        using K = GridEvent::Kind;
        if (e.event.kind == K::load_set) load = e.event.value;
        if (e.event.kind == K::load_delta) load += e.event.value;
        if ((e.event.kind == K::load_set || e.event.kind == K::load_delta) && !(load > 0.0)) {
            out.push_back(where + " would make the load power non-positive");
        }
        if (e.event.kind == K::fault_on && !(e.event.value >= 0.0)) {
            out.push_back(where + " fault conductance must be non-negative");
        }
        if ((e.event.kind == K::pv_connect || e.event.kind == K::pv_disconnect) && !c.pv.enabled) {
            out.push_back(where + " is a PV event but pv.enabled is false");
        }
    }

    for (std::size_t k = 0; k < c.expect.power_steps.size(); ++k) {
        const auto& p = c.expect.power_steps[k];
        const std::string where = "expect.power_steps[" + std::to_string(k) + "]";
        bool known = p.source == "pv" && c.pv.enabled;
        for (const auto& u : c.units) known = known || u.name == p.source;
        if (!known) out.push_back(where + ".source '" + p.source + "' is not a unit or an enabled pv");
        if (!(p.tolerance >= 0.0)) out.push_back(where + ".tolerance must be non-negative");
    }

    check_positive(out, "sim.dt", c.sim.dt);
    check_positive(out, "sim.t_end", c.sim.t_end);
    if (c.sim.decimation < 1) out.push_back("sim.decimation must be at least 1");
    if (!(c.sim.startup >= 0.0)) out.push_back("sim.startup must be non-negative");
    check_positive(out, "sim.divergence_limit", c.sim.divergence_limit);
    if (c.pv.enabled && c.pv.mode == PvMode::switched && c.sim.dt > SimConfig::kMaxSwitchedStep * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "sim.dt = " << c.sim.dt << " s exceeds " << SimConfig::kMaxSwitchedStep << " s for switched PV";
        out.push_back(msg.str());
    }
    return out;
}

GridModel build_grid(const ScenarioConfig& c) {
    InverterUnit base;
    base.osc = c.oscillator.params();
    base.gains = gains_of(c);
    base.filter = c.filter;
    base.vrl.kp = c.vrl.kp;
    base.vrl.ki = c.vrl.ki;
    base.vrl.v_ref_rms = c.vrl.v_ref_rms;
    base.vrl.scale_min = c.vrl.scale_min;
    base.vrl.scale_max = c.vrl.scale_max;
    base.vrl.guard_enabled = c.vrl.fault_guard;
    base.orbit_peak = calibrate_orbit_peak(base.osc);

    std::vector<InverterUnit> units;
    for (const auto& u : c.units) {
        auto unit = scale_unit_for_capacity(base, u.capacity);
        unit.name = u.name;
        units.push_back(std::move(unit));
    }

    std::optional<PvUnit> pv;
    if (c.pv.enabled) {
        PvUnit p;
        p.source = {c.pv.power, c.pv.v_dc, c.pv.connected};
        p.hysteresis.band = c.pv.band;
        p.mode = c.pv.mode;
        p.l = c.pv.l;
        p.r = c.pv.r;
        pv = p;
    }
    return GridModel(std::move(units), pv, c.load_power, c.v_nominal_rms);
}

EventSchedule build_schedule(const ScenarioConfig& c) {
    EventSchedule s;
    for (const auto& e : c.events) s.add(e.time, e.event);
    return s;
}

SimConfig build_sim_config(const ScenarioConfig& c) {
    SimConfig s;
    s.dt = c.sim.dt;
    s.t_end = c.sim.t_end;
    s.integrator = c.sim.integrator;
    s.decimation = c.sim.decimation;
    s.startup = c.sim.startup;
    s.divergence_limit = c.sim.divergence_limit;
    s.vrl_measurement = c.sim.vrl_measurement;
    return s;
}

void enable_switched_pv(ScenarioConfig& c) {
    c.pv.mode = PvMode::switched;
    if (c.sim.dt > SimConfig::kMaxSwitchedStep) {
        // Keep the output rate: 1e-5 s × 100 → 2e-6 s × 500.
        const double ratio = c.sim.dt / SimConfig::kMaxSwitchedStep;
        c.sim.decimation = static_cast<std::size_t>(std::llround(static_cast<double>(c.sim.decimation) * ratio));
        c.sim.dt = SimConfig::kMaxSwitchedStep;
    }
}

std::vector<std::string> builtin_names() { return {"paper-a", "paper-b", "paper-c"}; }

ScenarioConfig builtin_scenario(std::string_view name) {
    using K = GridEvent::Kind;
    if (name == "paper-a") {
        auto c = three_unit_grid("paper-a");
        c.sim.t_end = 5.0;
        c.events = {{3.0, {K::load_delta, -3000.0}}};
        c.expect.max_settling_time = 0.5;
        c.expect.share_tolerance = 0.05;
        c.expect.max_frequency_deviation = 0.25;
        c.expect.power_steps = {{"inv1", 3.0, -3000.0 * 6.0 / 11.0, 3000.0 * 6.0 / 11.0 * 0.05},
                                {"inv2", 3.0, -3000.0 * 3.0 / 11.0, 3000.0 * 3.0 / 11.0 * 0.05},
                                {"inv3", 3.0, -3000.0 * 2.0 / 11.0, 3000.0 * 2.0 / 11.0 * 0.05}};
        c.expect.max_power_balance_residual = 0.005;
        return c;
    }
    if (name == "paper-b") {
        auto c = three_unit_grid("paper-b");
        c.sim.t_end = 4.5;
        c.events = {{2.5, {K::fault_on, kDefaultFaultConductance}}, {3.0, {K::fault_off, 0.0}}};
        c.expect.max_settling_time = 1.0;
        c.expect.max_fault_rms_pu = 0.1;
        c.expect.share_tolerance = 0.05;
        return c;
    }
    if (name == "paper-c") {
        ScenarioConfig c;
        c.name = "paper-c";
        c.units = {{"battery", 1.0}};
        c.load_power = 5000.0;
        c.pv.enabled = true;
        c.pv.power = 4800.0;
        c.sim.t_end = 4.0;
        c.events = {{2.0, {K::load_delta, 3000.0}}, {3.0, {K::pv_disconnect, 0.0}}};
        c.expect.max_settling_time = 0.2;
        c.expect.max_power_balance_residual = 0.005;
        using H = PowerStepExpectation::Horizon;
        c.expect.power_steps = {{"battery", 2.0, 3000.0, 150.0, H::settled},
                                {"pv", 2.0, 0.0, 96.0, H::settled},
                                {"battery", 3.0, 4800.0, 240.0, H::cycle}};
        return c;
    }
    throw std::invalid_argument("unknown builtin scenario '" + std::string(name) +
                                "' (expected paper-a, paper-b or paper-c)");
}

}  // namespace dzvoc::cli
