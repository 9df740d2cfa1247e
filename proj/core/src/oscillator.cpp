#include "dzvoc/oscillator.hpp"

#include <cmath>
#include <sstream>

namespace dzvoc {

double OscillatorParams::resonance() const { return 1.0 / std::sqrt(l * c); }

std::vector<std::string> OscillatorParams::violations(bool require_tuned) const {
    std::vector<std::string> out;
    const auto positive = [&out](const char* name, double value) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            std::ostringstream msg;
            msg << name << " must be positive and finite (got " << value << ")";
            out.push_back(msg.str());
        }
    };
    positive("r", r);
    positive("l", l);
    positive("c", c);
    positive("sigma", sigma);
    positive("phi", phi);
    positive("r_s", r_s);
    positive("omega0", omega0);
    if (!out.empty() || !require_tuned) {
        return out;
    }
    if (!(sigma * r > 1.0)) {
        std::ostringstream msg;
        msg << "sigma*R must exceed 1 (got " << sigma * r << ")";
        out.push_back(msg.str());
    }
    const double detune = std::abs(resonance() - omega0) / omega0;
    if (!(detune < 1e-3)) {
        std::ostringstream msg;
        msg << "1/sqrt(LC) = " << resonance() << " rad/s is " << detune * 100.0
            << " % away from omega0 = " << omega0 << " rad/s (limit 0.1 %)";
        out.push_back(msg.str());
    }
    return out;
}

double dead_zone_f(double v, const OscillatorParams& p) {
    if (v > p.phi) {
        return 2.0 * p.sigma * (v - p.phi);
    }
    if (v < -p.phi) {
        return 2.0 * p.sigma * (v + p.phi);
    }
    return 0.0;
}

double source_current_g(double v, const OscillatorParams& p) { return dead_zone_f(v, p) - p.sigma * v; }

OscillatorDerivative oscillator_derivative(const OscillatorState& s, double i_alpha_measured,
                                           const OscillatorParams& p, const FeedbackGains& g) {
    const double i_g = -source_current_g(s.v_osc, p);
    const double i_feedback = g.i_gain * i_alpha_measured;
    return {(-s.v_osc / p.r + i_g - s.i_l - i_feedback) / p.c, s.v_osc / p.l};
}

double quadrature_voltage(const OscillatorState& s, const OscillatorParams& p) { return p.omega0 * p.l * s.i_l; }

ThreePhase pwm_reference(const OscillatorState& s, const OscillatorParams& p, const FeedbackGains& g,
                         double vrl_scale, double orbit_peak) {
    static const double kUnitPhasePeak = std::sqrt(1.5);
    const double k = kUnitPhasePeak / orbit_peak;
    return vrl_scale * g.v_gain * inverse_clarke({k * s.v_osc, k * quadrature_voltage(s, p)});
}

}  // namespace dzvoc
