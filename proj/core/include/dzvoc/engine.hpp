#pragma once

// Deterministic fixed-step simulation of the whole microgrid: event
// scheduling, trace recording and scenario metrics.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dzvoc/integrator.hpp"
#include "dzvoc/network.hpp"

namespace dzvoc {

/// Where the voltage recovery loop takes its RMS measurement from.
enum class VrlMeasurement {
    instantaneous,  ///< collective RMS of the current bus sample, sqrt(Σv²/3)
    windowed,       ///< one-cycle sliding RMS of the collective signal
};

std::string_view to_string(VrlMeasurement m);
VrlMeasurement parse_vrl_measurement(std::string_view name);

struct SimConfig {
    double dt = 1e-5;
    double t_end = 5.0;
    IntegratorKind integrator = IntegratorKind::rk4;
    std::size_t decimation = 100;
    double startup = 0.5;             ///< seconds excluded from metrics
    double divergence_limit = 1e6;
    VrlMeasurement vrl_measurement = VrlMeasurement::instantaneous;

    static constexpr double kMaxSwitchedStep = 2e-6;

    /// Violated invariants for running `grid` with this configuration.
    std::vector<std::string> violations(const GridModel& grid) const;
    std::size_t steps() const;
};

struct TimedEvent {
    double time = 0.0;
    GridEvent event;

    friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

/// Events ordered by time; equal times keep insertion order.
class EventSchedule {
public:
    EventSchedule() = default;
    EventSchedule(std::initializer_list<TimedEvent> events);

    void add(double time, const GridEvent& event);
    const std::vector<TimedEvent>& events() const { return events_; }
    bool empty() const { return events_.empty(); }

private:
    std::vector<TimedEvent> events_;
};

/// Column-major time series with a uniform time step; column 0 is "t".
class Trace {
public:
    Trace() = default;
    explicit Trace(std::vector<std::string> columns);

    void append(std::span<const double> row);

    const std::vector<std::string>& columns() const { return names_; }
    std::size_t rows() const { return data_.empty() ? 0 : data_.front().size(); }
    bool has(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    std::span<const double> column(std::string_view name) const;
    std::span<const double> column(std::size_t index) const { return data_.at(index); }
    std::span<const double> time() const { return column(0); }

    /// Mean of `name` over samples with t0 ≤ t ≤ t1. Throws when empty.
    double mean(std::string_view name, double t0, double t1) const;
    /// Value of the last sample at or before t.
    double at(std::string_view name, double t) const;
    /// Index of the first sample with time ≥ t (rows() if none).
    std::size_t lower_index(double t) const;

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> data_;
};

struct EventSettling {
    double event_time = 0.0;
    std::string label;
    std::optional<double> settling_time;  ///< empty when never settled
};

struct ShareWindow {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<double> mean_power;  ///< per grid-forming unit, watts
    std::vector<double> shares;      ///< mean_power normalized to sum 1
};

/// Change of one source's power across an event.
struct PowerStep {
    double event_time = 0.0;
    std::string label;
    std::string source;                     ///< unit name or "pv"
    std::optional<double> settled_delta;    ///< settled mean after minus settled mean before, watts
    std::optional<double> one_cycle_delta;  ///< instantaneous one cycle after minus settled mean before
};

struct ScenarioMetrics {
    std::vector<EventSettling> settling;
    std::vector<ShareWindow> shares;
    std::vector<PowerStep> power_steps;
    std::optional<double> fault_min_rms;
    std::optional<double> fault_max_rms;
    double max_frequency_deviation = 0.0;     ///< Hz, settled windows outside faults
    double max_power_balance_residual = 0.0;  ///< relative to load plus fault power
    std::optional<double> max_pv_tracking_error;  ///< amperes, switched PV only
};

struct MetricsOptions {
    double v_nominal_rms = kNominalPhaseRms;
    double band = 0.02;        ///< relative settling band
    double hold = 0.100;       ///< seconds the RMS must stay in band
    double exclusion = 0.100;  ///< seconds excluded after each event
    double startup = 0.5;
    double rms_window = SlidingRms::kDefaultWindow;
    std::vector<std::string> unit_names;
};

/// First time ≥ `from` at which `rms` stays within ±band of nominal for
/// `hold` seconds, searching no later than `until`. Returns the delay
/// relative to `from`, or nothing if the condition never holds.
std::optional<double> settling_time(std::span<const double> t, std::span<const double> rms, double from,
                                    double until, const MetricsOptions& opt);

/// Metrics derived only from the recorded trace and the event schedule.
ScenarioMetrics compute_metrics(const Trace& trace, const EventSchedule& schedule, const MetricsOptions& opt);

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, const std::string& what);
    double time() const { return time_; }

private:
    double time_;
};

/// Peak |v_osc| of the free-running oscillator (no feedback) over the last
/// ten nominal cycles of a `duration`-second run from the startup state.
double calibrate_orbit_peak(const OscillatorParams& p, double duration = 2.0, double dt = 1e-5);

struct RunResult {
    Trace trace;
    ScenarioMetrics metrics;
};

/// One simulation run. Owns its grid; strictly single-threaded.
class Simulation {
public:
    /// Units with orbit_peak ≤ 0 are calibrated with calibrate_orbit_peak().
    Simulation(GridModel grid, SimConfig config, EventSchedule schedule = {});

    /// Applies due events, records, updates controllers and advances one step.
    void step();
    void run_until(double t);
    RunResult run();

    double time() const;
    std::size_t step_index() const { return step_; }
    const GridModel& grid() const { return grid_; }
    const SimConfig& config() const { return config_; }
    const Trace& trace() const { return trace_; }
    MetricsOptions metrics_options() const;

    /// Latest cycle-averaged power of each unit, then PV (if present), then load.
    std::vector<PowerMeasurement> power() const;
    double bus_rms() const { return bus_rms_.value(); }

private:
    void apply_due_events();
    void measure_and_record();
    void update_controllers();
    void integrate();
    /// Integrator sub-steps per control step needed to keep the stiff bus
    /// shunt mode inside the explicit method's stability region.
    std::size_t substeps() const;
    void pack(std::vector<double>& x) const;
    void unpack(const std::vector<double>& x);
    void check_divergence(const std::vector<double>& x) const;

    GridModel grid_;
    SimConfig config_;
    EventSchedule schedule_;
    std::size_t next_event_ = 0;
    std::size_t step_ = 0;

    Integrator<std::vector<double>> integrator_;
    std::vector<double> x_;
    std::vector<ThreePhase> emf_;
    std::vector<PowerMeter> meters_;
    SlidingRms bus_rms_;
    FrequencyTracker frequency_;
    PvDrive pv_drive_;
    double max_tracking_error_ = 0.0;
    bool tracking_seen_ = false;

    Trace trace_;
    std::vector<double> row_;
};

RunResult run_scenario(const SimConfig& config, const EventSchedule& schedule, GridModel grid);

}  // namespace dzvoc
