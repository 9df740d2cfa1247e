#pragma once

// Small-signal analysis of the dead-zone oscillator. Each linear piece of the
// dead-zone function gives a second-order system
//     v'' = (β/C)·v' − v/(LC),
// with characteristic equation λ² − (β/C)·λ + 1/(LC) = 0.

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dzvoc/oscillator.hpp"

namespace dzvoc {

enum class Segment { above, inside, below };

std::string_view to_string(Segment s);
/// Throws std::invalid_argument for unknown names.
Segment parse_segment(std::string_view name);

struct SegmentLinearization {
    Segment segment = Segment::above;
    double beta_eff = 0.0;                          ///< siemens
    std::array<std::array<double, 2>, 2> matrix{};  ///< [[0, 1], [−1/(LC), β/C]]
};

struct EigenPair {
    double re = 0.0;  ///< 1/s
    double im = 0.0;  ///< rad/s
};

enum class StabilityClass { decaying, sustained, growing };

std::string_view to_string(StabilityClass c);

/// Outer segments: β = (σ − 1/R) − 2σ − α/R_s. Inside the dead zone f ≡ 0 so
/// the 2σ term drops out: β = (σ − 1/R) − α/R_s.
SegmentLinearization linearize_segment(const OscillatorParams& p, const FeedbackGains& g, Segment segment);

/// Both roots of the characteristic polynomial. Complex roots are returned as
/// (re, +im), (re, −im); real roots are ordered with the larger first.
std::pair<EigenPair, EigenPair> eigenvalues(const SegmentLinearization& lin, const OscillatorParams& p);

StabilityClass classify_stability(const EigenPair& eig);

/// σ that puts the outer-segment eigenvalues at real part `target_re`
/// (inverse of Re λ = β/(2C)).
double solve_sigma_for_decay(const OscillatorParams& p, const FeedbackGains& g, double target_re);

struct DesignCheck {
    std::string rule;
    bool pass = false;
    std::string detail;
};

struct DesignReport {
    std::vector<DesignCheck> checks;

    bool all_pass() const;
};

/// Checks σR > 1, tank resonance within 0.05 Hz of 50 Hz, outer segments
/// decaying and inner segment growing.
DesignReport validate_design(const OscillatorParams& p, const FeedbackGains& g);

struct ResponseSample {
    double t = 0.0;
    double v_osc = 0.0;
};

/// Response of one linear segment from v(0) = v0, v'(0) = 0. Requires dt ≤ 1e-4.
std::vector<ResponseSample> impulse_response(const SegmentLinearization& lin, const OscillatorParams& p,
                                             double duration, double dt, double v0 = 1.0);

/// Same initial condition through the full piecewise dynamics, with the
/// feedback modelled as the conductance α/R_s (the load used in the
/// linearization). Settles onto the limit cycle.
std::vector<ResponseSample> nonlinear_impulse_response(const OscillatorParams& p, const FeedbackGains& g,
                                                       double duration, double dt, double v0 = 1.0);

inline constexpr double kMaxImpulseStep = 1e-4;

}  // namespace dzvoc
