#include "dzvoc/control.hpp"

#include <algorithm>
#include <cmath>

namespace dzvoc {

double vrl_step(VrlState& s, double v_meas_rms, double dt) {
    const double error = s.v_ref_rms - v_meas_rms;
    const bool pushing_up = error > 0.0 && s.output >= s.scale_max;
    const bool pushing_down = error < 0.0 && s.output <= s.scale_min;
    if (!s.frozen && !pushing_up && !pushing_down) {
        s.integrator += s.ki * error * dt;
    }
    s.output = std::clamp(1.0 + s.kp * error + s.integrator, s.scale_min, s.scale_max);
    return s.output;
}

void vrl_fault_guard(VrlState& s, double v_meas_rms, double dt) {
    if (!s.guard_enabled) {
        return;
    }
    if (v_meas_rms < VrlState::kFreezeFraction * s.v_ref_rms) {
        s.low_voltage_time += dt;
        if (s.low_voltage_time > VrlState::kFreezeDelay) {
            s.frozen = true;
        }
        return;
    }
    s.low_voltage_time = 0.0;
    if (s.frozen && v_meas_rms > VrlState::kReleaseFraction * s.v_ref_rms) {
        s.integrator = 0.0;
        s.frozen = false;
    }
}

std::array<SwitchState, 3> hysteresis_step(HysteresisController& h, const ThreePhase& i_meas,
                                           const ThreePhase& i_ref) {
    const std::array<double, 3> meas{i_meas.a, i_meas.b, i_meas.c};
    const std::array<double, 3> ref{i_ref.a, i_ref.b, i_ref.c};
    for (std::size_t k = 0; k < 3; ++k) {
        if (meas[k] < ref[k] - h.band) {
            h.state[k] = SwitchState::high;
        } else if (meas[k] > ref[k] + h.band) {
            h.state[k] = SwitchState::low;
        }
    }
    return h.state;
}

ThreePhase pv_reference(const PvSource& pv, const AlphaBeta& v_bus, double nominal_phase_peak) {
    if (!pv.connected || pv.p_generated <= 0.0) {
        return {};
    }
    // |v_αβ| = √(3/2)·V̂ for a balanced set.
    const double magnitude = v_bus.magnitude();
    const double phase_peak = magnitude * std::sqrt(2.0 / 3.0);
    if (!(phase_peak > 0.1 * nominal_phase_peak)) {
        return {};
    }
    // Power-invariant frame: p = v_α·i_α + v_β·i_β = P.
    const double k = pv.p_generated / (magnitude * magnitude);
    return inverse_clarke({k * v_bus.alpha, k * v_bus.beta});
}

}  // namespace dzvoc
