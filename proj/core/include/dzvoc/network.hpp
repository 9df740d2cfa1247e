#pragma once

// Averaged electrical model of the islanded microgrid. Every grid-forming
// unit is an EMF behind a series R_f–L_f filter; all shunt filter capacitors
// sit in parallel on one common bus that also carries the resistive load,
// the fault element and the PV current injection. Phases are modelled
// independently with identical parameters.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dzvoc/control.hpp"
#include "dzvoc/oscillator.hpp"
#include "dzvoc/signals.hpp"

namespace dzvoc {

struct FilterParams {
    double r_f = 0.1;      ///< ohms
    double l_f = 250e-4;   ///< henries
    double c_f = 60e-6;    ///< farads

    std::vector<std::string> violations() const;

    friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

/// One grid-forming source: oscillator, gains, voltage recovery loop and
/// output filter. `orbit_peak` is the calibrated free-running peak of v_osc.
struct InverterUnit {
    std::string name = "inv1";
    OscillatorParams osc;
    FeedbackGains gains;
    VrlState vrl;
    FilterParams filter;
    double capacity_scale = 1.0;
    double orbit_peak = 1.0;
    OscillatorState osc_state;
};

/// A unit of capacity s_k relative to `base`: i_gain/s_k, R_f/s_k, L_f/s_k,
/// C_f·s_k and R_s/s_k. Scaling R_s with i_gain keeps α/R_s, and therefore the
/// small-signal eigenvalues, unchanged. Requires 0 < s_k ≤ 1.
InverterUnit scale_unit_for_capacity(const InverterUnit& base, double s_k);

enum class PvMode { averaged, switched };

std::string_view to_string(PvMode m);
PvMode parse_pv_mode(std::string_view name);

/// Grid-following PV inverter. In averaged mode it is an ideal current source
/// following its reference; in switched mode each leg is a two-level ±V_dc/2
/// source behind (r, l), with the converter neutral floating (three-wire).
struct PvUnit {
    PvSource source;
    HysteresisController hysteresis;
    PvMode mode = PvMode::averaged;
    double r = 0.1;       ///< ohms
    double l = 250e-4;    ///< henries
    ThreePhase i_ref;     ///< held between control updates
};

/// Offsets into the flat electrical state vector:
/// [filter currents of unit 0..n-1 (abc each)][bus voltage abc][PV current abc].
struct GridLayout {
    std::size_t units = 0;

    std::size_t size() const { return 3 * units + 6; }
    std::size_t filter(std::size_t k) const { return 3 * k; }
    std::size_t bus() const { return 3 * units; }
    std::size_t pv() const { return 3 * units + 3; }
};

ThreePhase load_phase(std::span<const double> x, std::size_t offset);
void store_phase(std::span<double> x, std::size_t offset, const ThreePhase& v);

struct GridEvent {
    enum class Kind { load_set, load_delta, fault_on, fault_off, pv_disconnect, pv_connect };
    Kind kind = Kind::load_set;
    double value = 0.0;  ///< watts for load events, siemens for fault_on

    friend bool operator==(const GridEvent&, const GridEvent&) = default;
};

std::string_view to_string(GridEvent::Kind k);
GridEvent::Kind parse_event_kind(std::string_view name);

inline constexpr double kDefaultFaultConductance = 1000.0;

struct GridModel {
    std::vector<InverterUnit> units;
    std::optional<PvUnit> pv;
    double v_nominal_rms = kNominalPhaseRms;
    double load_power = 0.0;         ///< watts at nominal voltage
    double load_conductance = 0.0;   ///< siemens per phase
    double fault_conductance = 0.0;  ///< siemens per phase
    std::vector<double> state;       ///< electrical state, see GridLayout

    GridModel() = default;
    GridModel(std::vector<InverterUnit> units, std::optional<PvUnit> pv, double load_power,
              double v_nominal_rms = kNominalPhaseRms);

    GridLayout layout() const { return {units.size()}; }
    double bus_capacitance() const;
    double nominal_phase_peak() const;

    ThreePhase bus_voltage() const { return load_phase(state, layout().bus()); }
    ThreePhase filter_current(std::size_t k) const { return load_phase(state, layout().filter(k)); }
    ThreePhase pv_current() const { return load_phase(state, layout().pv()); }

    /// Current the PV unit delivers to the bus for the given electrical state.
    ThreePhase pv_injection(std::span<const double> x) const;

    /// Sets the load from a power setpoint at nominal voltage, R = 3·V²/P.
    void set_load_power(double p);
};

/// Constant-resistance per-phase conductance for power `p` at `v_phase_rms`.
double load_conductance_for(double p, double v_phase_rms);

/// What drives the PV path during one derivative evaluation: the injected
/// current in averaged mode, the leg voltages in switched mode.
struct PvDrive {
    ThreePhase injection;
    ThreePhase leg_voltage;
};

/// Derivatives of the electrical states `x` (GridLayout order) for fixed
/// inverter EMFs and PV drive:
///   L_f·dI_f/dt = EMF − R_f·I_f − V_bus
///   C_bus·dV_bus/dt = ΣI_f + I_pv − (G_load + G_fault)·V_bus
void grid_derivative(const GridModel& g, std::span<const double> x, std::span<const ThreePhase> emf,
                     const PvDrive& pv, std::span<double> dxdt);

/// Leg voltages (±V_dc/2) for the given switch states.
ThreePhase leg_voltages(const std::array<SwitchState, 3>& sw, double v_dc);

/// Applies an event instantaneously. Throws std::invalid_argument when the
/// load power would become ≤ 0, for a negative fault conductance, or for PV
/// events on a grid without PV.
void apply_event(GridModel& g, const GridEvent& e);

struct PowerTap {
    enum class Kind { unit, pv, load, fault };
    Kind kind = Kind::unit;
    std::size_t index = 0;

    static PowerTap unit(std::size_t k) { return {Kind::unit, k}; }
    static PowerTap photovoltaic() { return {Kind::pv, 0}; }
    static PowerTap load() { return {Kind::load, 0}; }
    static PowerTap fault() { return {Kind::fault, 0}; }
};

/// Instantaneous three-phase power Σ v·i at the bus. Sources are measured at
/// their terminal (after the filter), so filter losses are not included.
double instantaneous_power(const GridModel& g, const PowerTap& tap);

/// Rate of change of energy stored in the bus capacitance for state `x` and
/// its derivative `dxdt`.
double stored_energy_rate(const GridModel& g, std::span<const double> x, std::span<const double> dxdt);

struct PowerMeasurement {
    double instantaneous = 0.0;  ///< watts
    double average = 0.0;        ///< watts, one-cycle sliding mean
};

/// Cycle-averaged power meter for one tap.
class PowerMeter {
public:
    PowerMeter(PowerTap tap, double dt, double window_s = SlidingRms::kDefaultWindow);

    const PowerMeasurement& update(const GridModel& g);
    const PowerMeasurement& value() const { return last_; }
    const PowerTap& tap() const { return tap_; }

private:
    PowerTap tap_;
    SlidingMean mean_;
    PowerMeasurement last_;
};

/// One-shot measurement without history (average equals instantaneous).
PowerMeasurement measure_power(const GridModel& g, const PowerTap& tap);

}  // namespace dzvoc
