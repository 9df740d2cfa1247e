#include "dzvoc/stability.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dzvoc/integrator.hpp"

namespace dzvoc {

namespace {

constexpr double kSustainedTolerance = 1e-9;
constexpr double kFrequencyTolerance = 0.05;  // Hz

void require_step(double duration, double dt) {
    if (!(dt > 0.0) || dt > kMaxImpulseStep) {
        std::ostringstream msg;
        msg << "impulse response step must be in (0, " << kMaxImpulseStep << "] s (got " << dt << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(duration > 0.0)) {
        throw std::invalid_argument("impulse response duration must be positive");
    }
}

template <typename Deriv>
std::vector<ResponseSample> integrate_response(double duration, double dt, double v0, Deriv&& deriv) {
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    std::vector<ResponseSample> out;
    out.reserve(steps + 1);
    std::array<double, 2> x{v0, 0.0};
    Rk4<std::array<double, 2>> rk4;
    out.push_back({0.0, x[0]});
    for (std::size_t k = 1; k <= steps; ++k) {
        rk4.step(x, dt, deriv);
        out.push_back({static_cast<double>(k) * dt, x[0]});
    }
    return out;
}

}  // namespace

std::string_view to_string(Segment s) {
    switch (s) {
        case Segment::above: return "above";
        case Segment::inside: return "inside";
        case Segment::below: return "below";
    }
    return "?";
}

Segment parse_segment(std::string_view name) {
    if (name == "above") return Segment::above;
    if (name == "inside") return Segment::inside;
    if (name == "below") return Segment::below;
    throw std::invalid_argument("unknown segment '" + std::string(name) + "' (expected above, inside or below)");
}

std::string_view to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::decaying: return "decaying";
        case StabilityClass::sustained: return "sustained";
        case StabilityClass::growing: return "growing";
    }
    return "?";
}

SegmentLinearization linearize_segment(const OscillatorParams& p, const FeedbackGains& g, Segment segment) {
    const double rho = p.sigma - 1.0 / p.r;
    const double feedback = g.alpha_total() / p.r_s;
    const double slope = segment == Segment::inside ? 0.0 : 2.0 * p.sigma;

    SegmentLinearization lin;
    lin.segment = segment;
    lin.beta_eff = rho - slope - feedback;
    lin.matrix = {{{0.0, 1.0}, {-1.0 / (p.l * p.c), lin.beta_eff / p.c}}};
    return lin;
}

std::pair<EigenPair, EigenPair> eigenvalues(const SegmentLinearization& lin, const OscillatorParams& p) {
    if (!(p.l > 0.0) || !(p.c > 0.0)) {
        throw std::invalid_argument("eigenvalues need positive L and C");
    }
    // λ² + bλ + c0 = 0
    const double b = -lin.beta_eff / p.c;
    const double c0 = 1.0 / (p.l * p.c);
    const double disc = b * b - 4.0 * c0;
    if (disc < 0.0) {
        const double re = -0.5 * b;
        const double im = 0.5 * std::sqrt(-disc);
        return {{re, im}, {re, -im}};
    }
    // q = −(b + sign(b)·√disc)/2 avoids cancellation; roots are q and c0/q.
    const double root = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(root, b));
    double r1 = q;
    double r2 = q != 0.0 ? c0 / q : 0.0;
    if (r2 > r1) {
        std::swap(r1, r2);
    }
    return {{r1, 0.0}, {r2, 0.0}};
}

StabilityClass classify_stability(const EigenPair& eig) {
    if (std::abs(eig.re) <= kSustainedTolerance) {
        return StabilityClass::sustained;
    }
    return eig.re < 0.0 ? StabilityClass::decaying : StabilityClass::growing;
}

double solve_sigma_for_decay(const OscillatorParams& p, const FeedbackGains& g, double target_re) {
    // Re λ = β/(2C) with β = −σ − 1/R − α/R_s.
    return -2.0 * p.c * target_re - 1.0 / p.r - g.alpha_total() / p.r_s;
}

bool DesignReport::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

DesignReport validate_design(const OscillatorParams& p, const FeedbackGains& g) {
    DesignReport report;
    {
        std::ostringstream detail;
        detail << "sigma*R = " << p.sigma * p.r;
        report.checks.push_back({"sigma > 1/R", p.sigma * p.r > 1.0, detail.str()});
    }
    {
        const double f = p.resonance() / (2.0 * std::numbers::pi);
        std::ostringstream detail;
        detail << "1/(2*pi*sqrt(LC)) = " << f << " Hz";
        report.checks.push_back(
            {"tank resonance 50 Hz +/- 0.05 Hz", std::abs(f - kNominalFrequency) < kFrequencyTolerance, detail.str()});
    }
    for (Segment s : {Segment::above, Segment::below}) {
        const auto eig = eigenvalues(linearize_segment(p, g, s), p).first;
        std::ostringstream detail;
        detail << "Re(lambda) = " << eig.re;
        report.checks.push_back({std::string("outer segment '") + std::string(to_string(s)) + "' decaying",
                                 classify_stability(eig) == StabilityClass::decaying, detail.str()});
    }
    {
        const auto eig = eigenvalues(linearize_segment(p, g, Segment::inside), p).first;
        std::ostringstream detail;
        detail << "Re(lambda) = " << eig.re;
        report.checks.push_back(
            {"inner segment growing", classify_stability(eig) == StabilityClass::growing, detail.str()});
    }
    return report;
}

std::vector<ResponseSample> impulse_response(const SegmentLinearization& lin, const OscillatorParams& /*p*/,
                                             double duration, double dt, double v0) {
    require_step(duration, dt);
    const auto a = lin.matrix;
    return integrate_response(duration, dt, v0, [&a](const std::array<double, 2>& x, std::array<double, 2>& dx) {
        dx[0] = a[0][0] * x[0] + a[0][1] * x[1];
        dx[1] = a[1][0] * x[0] + a[1][1] * x[1];
    });
}

std::vector<ResponseSample> nonlinear_impulse_response(const OscillatorParams& p, const FeedbackGains& g,
                                                       double duration, double dt, double v0) {
    require_step(duration, dt);
    const double load = g.alpha_total() / p.r_s;
    // State is (v_osc, i_L); only v_osc is reported.
    return integrate_response(duration, dt, v0, [&](const std::array<double, 2>& x, std::array<double, 2>& dx) {
        const double v = x[0];
        dx[0] = (-v / p.r - source_current_g(v, p) - x[1] - load * v) / p.c;
        dx[1] = v / p.l;
    });
}

}  // namespace dzvoc
