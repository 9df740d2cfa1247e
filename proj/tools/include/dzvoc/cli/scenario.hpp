#pragma once

// Declarative scenario description and the built-in reproductions of the
// load-step, fault and PV experiments.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dzvoc/engine.hpp"

namespace dzvoc::cli {

struct UnitConfig {
    std::string name;
    double capacity = 1.0;

    friend bool operator==(const UnitConfig&, const UnitConfig&) = default;
};

struct PvConfig {
    bool enabled = false;
    double power = 4800.0;
    double v_dc = 600.0;
    double band = 0.5;
    double l = 250e-4;
    double r = 0.1;
    bool connected = true;
    PvMode mode = PvMode::averaged;

    friend bool operator==(const PvConfig&, const PvConfig&) = default;
};

struct VrlConfig {
    double kp = VrlState{}.kp;
    double ki = VrlState{}.ki;
    double v_ref_rms = VrlState{}.v_ref_rms;
    double scale_min = VrlState{}.scale_min;
    double scale_max = VrlState{}.scale_max;
    bool fault_guard = true;

    friend bool operator==(const VrlConfig&, const VrlConfig&) = default;
};

/// Expected change of one source's power across the event at `time`.
struct PowerStepExpectation {
    enum class Horizon { settled, cycle };

    std::string source;
    double time = 0.0;
    double delta = 0.0;      ///< watts
    double tolerance = 0.0;  ///< watts, absolute
    Horizon horizon = Horizon::settled;

    friend bool operator==(const PowerStepExpectation&, const PowerStepExpectation&) = default;
};

std::string_view to_string(PowerStepExpectation::Horizon h);
PowerStepExpectation::Horizon parse_horizon(std::string_view name);

/// Checks evaluated against the recorded trace after a run. Unset fields are
/// not checked.
struct Expectations {
    std::optional<double> max_settling_time;          ///< s, every event except fault_on
    std::optional<double> share_tolerance;            ///< absolute, vs capacity ratios
    std::optional<double> max_fault_rms_pu;           ///< during faults
    std::optional<double> max_frequency_deviation;    ///< Hz
    std::optional<double> max_power_balance_residual; ///< relative
    std::optional<double> max_pv_tracking_error;      ///< amperes, switched PV
    std::vector<PowerStepExpectation> power_steps;

    friend bool operator==(const Expectations&, const Expectations&) = default;
};

struct SimSettings {
    double dt = 1e-5;
    double t_end = 5.0;
    IntegratorKind integrator = IntegratorKind::rk4;
    std::size_t decimation = 100;
    double startup = 0.5;
    double divergence_limit = 1e6;
    VrlMeasurement vrl_measurement = VrlMeasurement::instantaneous;

    friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct OscillatorConfig {
    double r = OscillatorParams{}.r;
    double l = OscillatorParams{}.l;
    double c = OscillatorParams{}.c;
    double sigma = OscillatorParams{}.sigma;
    double phi = OscillatorParams{}.phi;
    double r_s = OscillatorParams{}.r_s;
    double omega0 = OscillatorParams{}.omega0;

    OscillatorParams params() const { return {r, l, c, sigma, phi, r_s, omega0}; }
    friend bool operator==(const OscillatorConfig&, const OscillatorConfig&) = default;
};

struct ScenarioConfig {
    std::string name = "custom";
    OscillatorConfig oscillator;
    double i_gain = FeedbackGains{}.i_gain;
    double v_gain = FeedbackGains{}.v_gain;
    FilterParams filter;
    VrlConfig vrl;
    std::vector<UnitConfig> units{{"inv1", 1.0}};
    double load_power = 8000.0;
    double v_nominal_rms = kNominalPhaseRms;
    PvConfig pv;
    std::vector<TimedEvent> events;
    SimSettings sim;
    Expectations expect;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Every violated rule: parameter positivity, the oscillator design rules,
/// capacity range, event ordering and simulation settings.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Grid, schedule and simulation settings for a validated config.
GridModel build_grid(const ScenarioConfig& config);
EventSchedule build_schedule(const ScenarioConfig& config);
SimConfig build_sim_config(const ScenarioConfig& config);

/// Switches the PV unit to switched hysteresis mode and tightens dt to the
/// switched-mode limit when necessary.
void enable_switched_pv(ScenarioConfig& config);

std::vector<std::string> builtin_names();
/// Throws std::invalid_argument for unknown names.
ScenarioConfig builtin_scenario(std::string_view name);

}  // namespace dzvoc::cli
