#pragma once

// Outer controllers: the voltage recovery loop (PI on RMS voltage that scales
// the PWM reference) with its fault guard, and the hysteresis-band current
// controller of the grid-following PV inverter.

#include <array>
#include <cstdint>

#include "dzvoc/signals.hpp"

namespace dzvoc {

inline constexpr double kNominalPhaseRms = 230.0;

/// Voltage recovery loop. `output` is the multiplier applied to the PWM
/// reference; the integrator only moves while the output is not saturated in
/// the direction of the error, and never while frozen by the fault guard.
struct VrlState {
    double kp = 1e-3;          ///< per volt
    double ki = 0.3;           ///< per volt-second
    double v_ref_rms = kNominalPhaseRms;
    double scale_min = 0.5;
    double scale_max = 1.5;
    bool guard_enabled = true;

    double integrator = 0.0;
    double output = 1.0;
    bool frozen = false;
    double low_voltage_time = 0.0;  ///< time spent below the freeze threshold

    static constexpr double kFreezeFraction = 0.5;
    static constexpr double kFreezeDelay = 0.020;  ///< seconds
    static constexpr double kReleaseFraction = 0.9;
};

/// One PI update; returns the new output scale.
double vrl_step(VrlState& s, double v_meas_rms, double dt);

/// Freezes the integrator after the voltage has stayed below half of the
/// setpoint for more than 20 ms, and resets it (integrator = 0, unfrozen)
/// once the voltage is back above 90 % of the setpoint.
void vrl_fault_guard(VrlState& s, double v_meas_rms, double dt);

enum class SwitchState : std::uint8_t { low, high };

struct HysteresisController {
    double band = 0.5;  ///< amperes, half-width
    std::array<SwitchState, 3> state{SwitchState::low, SwitchState::low, SwitchState::low};
};

/// Per phase: below the band → high, above the band → low, inside → hold.
std::array<SwitchState, 3> hysteresis_step(HysteresisController& h, const ThreePhase& i_meas,
                                           const ThreePhase& i_ref);

struct PvSource {
    double p_generated = 4800.0;  ///< watts
    double v_dc = 600.0;          ///< volts
    bool connected = true;
};

/// Current reference in phase with the bus voltage whose average three-phase
/// power equals p_generated. The phase peak is 2P / (3·V̂) with V̂ the measured
/// phase peak. Zero when disconnected, when P ≤ 0, or when the bus amplitude
/// is at or below 0.1 pu of `nominal_phase_peak`.
ThreePhase pv_reference(const PvSource& pv, const AlphaBeta& v_bus, double nominal_phase_peak);

}  // namespace dzvoc
