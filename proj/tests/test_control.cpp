#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dzvoc/control.hpp"
#include "support.hpp"

using namespace dzvoc;
using dzvoc::test::uniform;

TEST_CASE("recovery loop at zero error") {
    VrlState s;
    for (int k = 0; k < 100; ++k) CHECK(vrl_step(s, 230.0, 1e-5) == 1.0);
    CHECK(s.integrator == 0.0);
}

TEST_CASE("recovery loop slews at ki times the error") {
    VrlState s;
    s.kp = 0.0;
    const double e = 10.0, dt = 1e-4;
    for (int k = 0; k < 1000; ++k) vrl_step(s, 230.0 - e, dt);
    CHECK(s.output == doctest::Approx(1.0 + s.ki * e * 0.1).epsilon(1e-12));

    VrlState p;
    vrl_step(p, 220.0, 1e-5);
    CHECK(p.output == doctest::Approx(1.0 + p.kp * 10.0 + p.ki * 10.0 * 1e-5));
}

TEST_CASE("recovery loop output stays within limits") {
    for (int n = 0; n < 200; ++n) {
        VrlState s;
        for (int k = 0; k < 500; ++k) {
            vrl_step(s, uniform(0.0, 500.0), uniform(1e-6, 1e-2));
            REQUIRE(s.output >= s.scale_min);
            REQUIRE(s.output <= s.scale_max);
        }
    }
}

TEST_CASE("recovery loop anti-windup") {
    VrlState s;
    const double dt = 1e-3;
    const double e = 100.0;
    for (int k = 0; k < 100000; ++k) {
        vrl_step(s, s.v_ref_rms - e, dt);
        // integrator at most one step past the value that saturates the output
        CHECK(1.0 + s.kp * e + s.integrator <= s.scale_max + s.ki * e * dt + 1e-12);
    }
    CHECK(s.output == s.scale_max);

    // unwinds immediately once the error reverses
    vrl_step(s, s.v_ref_rms + 1.0, dt);
    CHECK(s.output < s.scale_max);

    VrlState low;
    for (int k = 0; k < 100000; ++k) {
        vrl_step(low, low.v_ref_rms + e, dt);
        CHECK(1.0 - low.kp * e + low.integrator >= low.scale_min - low.ki * e * dt - 1e-12);
    }
    CHECK(low.output == low.scale_min);
}

TEST_CASE("frozen integrator holds") {
    VrlState s;
    s.integrator = 0.1;
    s.frozen = true;
    vrl_step(s, 100.0, 1e-3);
    CHECK(s.integrator == 0.1);
    CHECK(s.output == doctest::Approx(std::min(s.scale_max, 1.0 + s.kp * 130.0 + 0.1)));
}

TEST_CASE("fault guard") {
    const double dt = 1e-5;

    SUBCASE("nominal voltage never freezes") {
        VrlState s;
        for (int k = 0; k < 100000; ++k) vrl_fault_guard(s, 230.0, dt);
        CHECK_FALSE(s.frozen);
    }

    SUBCASE("short dips do not freeze") {
        VrlState s;
        for (int k = 0; k < 1000; ++k) vrl_fault_guard(s, 0.8 * 230.0, dt);
        CHECK_FALSE(s.frozen);
        for (int k = 0; k < 1000; ++k) vrl_fault_guard(s, 0.3 * 230.0, dt);
        CHECK_FALSE(s.frozen);
        vrl_fault_guard(s, 230.0, dt);
        for (int k = 0; k < 1500; ++k) vrl_fault_guard(s, 0.3 * 230.0, dt);
        CHECK_FALSE(s.frozen);
    }

    SUBCASE("freezes after 20 ms below half voltage and resets above 0.9 pu") {
        VrlState s;
        s.integrator = 0.2;
        for (int k = 0; k < 1999; ++k) vrl_fault_guard(s, 10.0, dt);
        CHECK_FALSE(s.frozen);
        for (int k = 0; k < 10; ++k) vrl_fault_guard(s, 10.0, dt);
        CHECK(s.frozen);
        CHECK(s.integrator == 0.2);

        vrl_fault_guard(s, 0.7 * 230.0, dt);
        CHECK(s.frozen);
        CHECK(s.integrator == 0.2);

        vrl_fault_guard(s, 0.95 * 230.0, dt);
        CHECK_FALSE(s.frozen);
        CHECK(s.integrator == 0.0);
    }

    SUBCASE("disabled guard never freezes") {
        VrlState s;
        s.guard_enabled = false;
        for (int k = 0; k < 100000; ++k) vrl_fault_guard(s, 0.0, dt);
        CHECK_FALSE(s.frozen);
    }
}

TEST_CASE("hysteresis switching logic") {
    HysteresisController h;
    const ThreePhase ref{1.0, 2.0, 3.0};
    CHECK(hysteresis_step(h, ref, ref) == std::array{SwitchState::low, SwitchState::low, SwitchState::low});
    const auto below = hysteresis_step(h, {1.0 - 2 * h.band, 2.0, 3.0 + 2 * h.band}, ref);
    CHECK(below[0] == SwitchState::high);
    CHECK(below[1] == SwitchState::low);
    CHECK(below[2] == SwitchState::low);
    CHECK(hysteresis_step(h, ref, ref)[0] == SwitchState::high);
    CHECK(hysteresis_step(h, {1.0 + h.band, 2.0, 3.0}, ref)[0] == SwitchState::high);
    CHECK(hysteresis_step(h, {1.0 + 1.01 * h.band, 2.0, 3.0}, ref)[0] == SwitchState::low);
}

TEST_CASE("hysteresis never changes state inside the band") {
    HysteresisController h;
    for (int n = 0; n < 10000; ++n) {
        const ThreePhase ref{uniform(-10, 10), uniform(-10, 10), uniform(-10, 10)};
        const ThreePhase meas = ref + ThreePhase{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
        const auto before = h.state;
        const auto after = hysteresis_step(h, meas, ref);
        const std::array<double, 3> err{meas.a - ref.a, meas.b - ref.b, meas.c - ref.c};
        for (std::size_t k = 0; k < 3; ++k) {
            if (std::abs(err[k]) <= h.band) CHECK(after[k] == before[k]);
            if (err[k] < -h.band) CHECK(after[k] == SwitchState::high);
            if (err[k] > h.band) CHECK(after[k] == SwitchState::low);
        }
    }
}

TEST_CASE("hysteresis tracks a sinusoid through an inductor") {
    // One leg at ±V_dc/2 behind R-L into a sinusoidal back-EMF that the leg can overcome.
    HysteresisController h;
    const double v_dc = 600.0, l = 25e-3, r = 0.1, dt = 2e-6;
    const double emf_peak = 200.0, i_peak = 9.8;
    const double w = 2 * std::numbers::pi * 50.0;
    double i = 0.0, worst = 0.0, max_didt = 0.0;
    const int steps = static_cast<int>(std::lround(0.06 / dt));
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const double ref = i_peak * std::sin(w * t);
        const auto sw = hysteresis_step(h, {i, 0.0, 0.0}, {ref, 0.0, 0.0});
        const double u = sw[0] == SwitchState::high ? v_dc / 2 : -v_dc / 2;
        if (t >= 0.02) worst = std::max(worst, std::abs(i - ref));
        // exact update of L di/dt = u − e − r i with e frozen over the step
        const double drive = u - emf_peak * std::sin(w * (t + dt / 2));
        const double didt = (drive - r * i) / l;
        max_didt = std::max(max_didt, std::abs(didt));
        const double decay = std::exp(-r / l * dt);
        i = i * decay + drive / r * (1 - decay);
    }
    CHECK(worst <= h.band + max_didt * dt);
    CHECK(worst > h.band * 0.9);
}

TEST_CASE("PV current reference") {
    const PvSource pv;
    const double v_hat = 400.0 * std::sqrt(2.0) / std::sqrt(3.0);

    SUBCASE("in phase with the bus, delivers the dispatched power") {
        for (int k = 0; k < 36; ++k) {
            const double theta = k * std::numbers::pi / 18;
            const ThreePhase v{v_hat * std::cos(theta), v_hat * std::cos(theta - 2 * std::numbers::pi / 3),
                               v_hat * std::cos(theta + 2 * std::numbers::pi / 3)};
            const auto i = pv_reference(pv, clarke(v), v_hat);
            CHECK(i.a == doctest::Approx(9.798 * std::cos(theta)).epsilon(1e-3));
            CHECK(v.dot(i) == doctest::Approx(4800.0).epsilon(1e-12));
            CHECK(std::abs(i.sum()) < 1e-9);
        }
        CHECK(2 * 4800.0 / (3 * v_hat) == doctest::Approx(9.80).epsilon(1e-3));
    }

    SUBCASE("zero when disconnected, at zero power or collapsed voltage") {
        const AlphaBeta v{std::sqrt(1.5) * v_hat, 0.0};
        PvSource off = pv;
        off.connected = false;
        CHECK(pv_reference(off, v, v_hat) == ThreePhase{});
        PvSource idle = pv;
        idle.p_generated = 0.0;
        CHECK(pv_reference(idle, v, v_hat) == ThreePhase{});
        CHECK(pv_reference(pv, {std::sqrt(1.5) * 0.09 * v_hat, 0.0}, v_hat) == ThreePhase{});
        CHECK(pv_reference(pv, {std::sqrt(1.5) * 0.11 * v_hat, 0.0}, v_hat).a > 0.0);
    }
}
