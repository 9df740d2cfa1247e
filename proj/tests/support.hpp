#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "dzvoc/integrator.hpp"
#include "dzvoc/oscillator.hpp"

namespace dzvoc::test {

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

struct OrbitSample {
    double t;
    double v;
    double i_l;
};

/// Oscillator without current feedback, RK4 from the default start state.
inline std::vector<OrbitSample> free_run(const OscillatorParams& p, double duration, double dt) {
    std::array<double, 2> x{OscillatorState{}.v_osc, OscillatorState{}.i_l};
    Rk4<std::array<double, 2>> rk4;
    const FeedbackGains g;
    auto deriv = [&](const std::array<double, 2>& s, std::array<double, 2>& d) {
        const auto r = oscillator_derivative({s[0], s[1]}, 0.0, p, g);
        d = {r.dv_osc, r.di_l};
    };
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    std::vector<OrbitSample> out;
    out.reserve(steps + 1);
    out.push_back({0.0, x[0], x[1]});
    for (std::size_t k = 1; k <= steps; ++k) {
        rk4.step(x, dt, deriv);
        out.push_back({static_cast<double>(k) * dt, x[0], x[1]});
    }
    return out;
}

/// Local maxima of `v` (index, value) after time t0.
template <typename T, typename Get>
std::vector<std::pair<std::size_t, double>> local_maxima(const std::vector<T>& xs, Get get) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const double a = get(xs[i - 1]), b = get(xs[i]), c = get(xs[i + 1]);
        if (b > a && b >= c) out.emplace_back(i, b);
    }
    return out;
}

}  // namespace dzvoc::test
