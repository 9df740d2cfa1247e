#pragma once

// Dead-zone virtual oscillator: a parallel virtual RLC tank driven by a
// piecewise-linear nonlinear current source, with the inverter's measured
// alpha current fed back into the tank.

#include <numbers>
#include <string>
#include <vector>

#include "dzvoc/signals.hpp"

namespace dzvoc {

inline constexpr double kNominalFrequency = 50.0;
inline constexpr double kNominalOmega = 2.0 * std::numbers::pi * kNominalFrequency;

struct OscillatorParams {
    double r = 10.0;             ///< ohms
    double l = 250e-6;           ///< henries
    double c = 0.04052847;       ///< farads
    double sigma = 0.4572;       ///< siemens; 2σ is the outer slope of the dead-zone source
    double phi = 0.5;            ///< volts, dead-zone half-width
    double r_s = 10.0;           ///< ohms, feedback scaling resistance (analysis only)
    double omega0 = kNominalOmega;

    /// Natural frequency of the LC tank, 1/√(LC), in rad/s.
    double resonance() const;

    /// Human-readable list of violated invariants; empty when valid.
    /// With `require_tuned`, also checks σR > 1 and that 1/√(LC) is within
    /// 0.1 % of omega0.
    std::vector<std::string> violations(bool require_tuned = true) const;
};

struct FeedbackGains {
    double i_gain = 1.0568e-3;
    double v_gain = 400.0 * std::numbers::sqrt2 / std::numbers::sqrt3;  ///< volts

    /// Overall loop gain α = i_gain · v_gain.
    double alpha_total() const { return i_gain * v_gain; }
};

struct OscillatorState {
    double v_osc = 0.1;  ///< capacitor voltage, volts
    double i_l = 0.0;    ///< virtual inductor current, amperes

    friend bool operator==(const OscillatorState&, const OscillatorState&) = default;
};

struct OscillatorDerivative {
    double dv_osc = 0.0;
    double di_l = 0.0;
};

/// Dead-zone function: zero for |v| ≤ φ, slope 2σ outside.
double dead_zone_f(double v, const OscillatorParams& p);

/// g(v) = f(v) − σ·v. The current injected into the tank is −g(v).
double source_current_g(double v, const OscillatorParams& p);

/// KCL at the tank node with i_feedback = i_gain · i_alpha_measured.
OscillatorDerivative oscillator_derivative(const OscillatorState& s, double i_alpha_measured,
                                           const OscillatorParams& p, const FeedbackGains& g);

/// Averaged PWM voltage reference. Alpha is v_osc and beta is ω0·L·i_L; both
/// are divided by `orbit_peak` (the free-running limit-cycle peak) and scaled
/// by √(3/2) so that, on the orbit and with vrl_scale = 1, each phase peaks at
/// exactly v_gain.
ThreePhase pwm_reference(const OscillatorState& s, const OscillatorParams& p, const FeedbackGains& g,
                         double vrl_scale, double orbit_peak);

/// Quadrature (beta) component of the tank state, ω0·L·i_L.
double quadrature_voltage(const OscillatorState& s, const OscillatorParams& p);

}  // namespace dzvoc
