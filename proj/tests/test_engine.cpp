#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "dzvoc/engine.hpp"
#include "support.hpp"

using namespace dzvoc;

namespace {

GridModel one_unit(double load = 8000.0) {
    InverterUnit u;
    u.name = "inv1";
    return GridModel({u}, std::nullopt, load);
}

GridModel three_units(bool pv = false) {
    InverterUnit base;
    auto u2 = scale_unit_for_capacity(base, 0.5);
    auto u3 = scale_unit_for_capacity(base, 1.0 / 3);
    base.name = "inv1";
    u2.name = "inv2";
    u3.name = "inv3";
    std::optional<PvUnit> p;
    if (pv) p = PvUnit{};
    return GridModel({base, u2, u3}, p, pv ? 5000.0 : 8000.0);
}

SimConfig short_config(double t_end, double dt = 1e-5) {
    SimConfig c;
    c.dt = dt;
    c.t_end = t_end;
    c.decimation = 10;
    return c;
}

/// Error at t = 1 of a damped linear oscillator integrated with step dt.
template <typename Stepper>
double oscillator_error(double dt) {
    const double w = 2 * std::numbers::pi, zeta = 0.1;
    std::vector<double> x{1.0, 0.0};
    Stepper stepper;
    const auto steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) {
        stepper.step(x, dt, [&](const std::vector<double>& s, std::vector<double>& d) {
            d.resize(2);
            d[0] = s[1];
            d[1] = -w * w * s[0] - 2 * zeta * w * s[1];
        });
    }
    const double wd = w * std::sqrt(1 - zeta * zeta);
    const double a = -zeta * w;
    const double exact = std::exp(a) * (std::cos(wd) - a / wd * std::sin(wd));
    return std::abs(x[0] - exact);
}

template <typename Stepper>
double convergence_slope() {
    std::vector<double> lx, ly;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        lx.push_back(std::log(dt));
        ly.push_back(std::log(oscillator_error<Stepper>(dt)));
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool bitwise_equal(const Trace& a, const Trace& b) {
    if (a.columns() != b.columns() || a.rows() != b.rows()) return false;
    for (std::size_t j = 0; j < a.columns().size(); ++j) {
        const auto x = a.column(j), y = b.column(j);
        if (std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("RK4 converges with order four") {
    const double slope = convergence_slope<Rk4<std::vector<double>>>();
    CHECK(slope == doctest::Approx(4.0).epsilon(0.3 / 4.0));
    const double euler = convergence_slope<ForwardEuler<std::vector<double>>>();
    CHECK(euler == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("integrator names") {
    CHECK(parse_integrator("rk4") == IntegratorKind::rk4);
    CHECK(to_string(IntegratorKind::euler) == "euler");
    CHECK_THROWS_AS(parse_integrator("rk45"), std::invalid_argument);
    CHECK(parse_vrl_measurement("windowed") == VrlMeasurement::windowed);
    CHECK_THROWS_AS(parse_vrl_measurement("peak"), std::invalid_argument);
}

TEST_CASE("zero-energy world stays at rest") {
    auto grid = one_unit();
    grid.units[0].osc_state = {0.0, 0.0};
    Simulation sim(grid, short_config(0.01));
    sim.run_until(0.01);
    CHECK(sim.grid().units[0].osc_state == OscillatorState{0.0, 0.0});
    for (double x : sim.grid().state) CHECK(x == 0.0);
}

TEST_CASE("event schedule ordering") {
    EventSchedule s;
    s.add(2.0, {GridEvent::Kind::fault_off, 0.0});
    s.add(1.0, {GridEvent::Kind::fault_on, 1000.0});
    s.add(2.0, {GridEvent::Kind::load_set, 100.0});
    REQUIRE(s.events().size() == 3);
    CHECK(s.events()[0].time == 1.0);
    CHECK(s.events()[1].event.kind == GridEvent::Kind::fault_off);
    CHECK(s.events()[2].event.kind == GridEvent::Kind::load_set);
    CHECK_THROWS_AS(s.add(-1.0, {}), std::invalid_argument);
}

TEST_CASE("configuration checks") {
    auto grid = three_units(true);
    SimConfig c;
    CHECK(c.violations(grid).empty());
    grid.pv->mode = PvMode::switched;
    CHECK(c.violations(grid).size() == 1);
    c.dt = 2e-6;
    CHECK(c.violations(grid).empty());
    c.decimation = 0;
    c.t_end = -1;
    CHECK(c.violations(grid).size() == 2);
    CHECK_THROWS_AS(Simulation(grid, c), std::invalid_argument);

    EventSchedule late{{9.0, {GridEvent::Kind::load_delta, 100.0}}};
    CHECK_THROWS_AS(run_scenario(short_config(1.0), late, one_unit()), std::invalid_argument);
}

TEST_CASE("divergence guard reports the time") {
    auto config = short_config(0.1);
    config.divergence_limit = 50.0;
    try {
        run_scenario(config, {}, one_unit());
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 0.1);
        CHECK(std::string(e.what()).find("divergence") != std::string::npos);
    }
}

TEST_CASE("event takes effect on the step it is due") {
    const double dt = 1e-5;
    EventSchedule schedule{{0.3, {GridEvent::Kind::load_delta, -3000.0}}};
    Simulation sim(one_unit(), short_config(0.4, dt), schedule);
    sim.run_until(0.3);
    const double g_old = sim.grid().load_conductance;
    const double v2 = sim.grid().bus_voltage().sum_of_squares();
    sim.step();
    const double g_new = load_conductance_for(5000.0, 230.0);
    CHECK(sim.grid().load_conductance == g_new);
    CHECK(g_new != g_old);
    CHECK(sim.power().back().instantaneous == g_new * v2);
}

TEST_CASE("runs are bit-for-bit deterministic") {
    EventSchedule schedule{{0.2, {GridEvent::Kind::load_delta, -3000.0}}};
    const auto a = run_scenario(short_config(0.3), schedule, three_units());
    const auto b = run_scenario(short_config(0.3), schedule, three_units());
    CHECK(a.trace.rows() == 3000);
    CHECK(bitwise_equal(a.trace, b.trace));
}

TEST_CASE("free unit settles at 50 Hz with steady RMS") {
    auto config = short_config(3.5);
    config.decimation = 1;
    const auto run = run_scenario(config, {}, one_unit());
    const auto& trace = run.trace;
    const auto t = trace.time();
    const auto va = trace.column("bus_va");
    const auto rms = trace.column("bus_vrms");
    const std::size_t i0 = trace.lower_index(1.5);

    const double f = estimate_frequency(va.subspan(i0), config.dt);
    CHECK(std::abs(f - 50.0) < 0.25);

    double lo = rms[i0], hi = rms[i0];
    for (std::size_t i = i0; i < t.size(); ++i) {
        lo = std::min(lo, rms[i]);
        hi = std::max(hi, rms[i]);
    }
    CHECK((hi - lo) / hi < 1e-3);
    CHECK(trace.mean("bus_vrms", 1.5, 3.5) == doctest::Approx(230.0).epsilon(0.02));
    CHECK(run.metrics.max_frequency_deviation < 0.25);
    CHECK(run.metrics.max_power_balance_residual < 0.005);
}

TEST_CASE("halving the step barely changes the settled RMS") {
    const auto coarse = run_scenario(short_config(1.0, 1e-5), {}, one_unit());
    const auto fine = run_scenario(short_config(1.0, 5e-6), {}, one_unit());
    const double a = coarse.trace.mean("bus_vrms", 0.8, 1.0);
    const double b = fine.trace.mean("bus_vrms", 0.8, 1.0);
    CHECK(std::abs(a - b) / a < 1e-4);
}

TEST_CASE("averaged PV injects its dispatched power") {
    const auto run = run_scenario(short_config(1.0), {}, three_units(true));
    const double p = run.trace.mean("pv_p", 0.8, 0.9);
    CHECK(p == doctest::Approx(4800.0).epsilon(0.02));
    CHECK(run.metrics.max_power_balance_residual < 0.005);
    CHECK_FALSE(run.metrics.max_pv_tracking_error.has_value());
}

TEST_CASE("settling time of a synthetic exponential") {
    const double dt = 1e-3, tau = 0.1, t0 = 1.0;
    std::vector<double> t, rms;
    for (int k = 0; k <= 3000; ++k) {
        const double tk = k * dt;
        t.push_back(tk);
        rms.push_back(tk < t0 ? 230.0 : 230.0 * (1.0 + 0.05 * std::exp(-(tk - t0) / tau)));
    }
    MetricsOptions opt;
    const auto s = settling_time(t, rms, t0, 3.0, opt);
    REQUIRE(s.has_value());
    CHECK(std::abs(*s - tau * std::log(5.0 / 2.0)) <= dt);

    const std::vector<double> flat(t.size(), 230.0);
    CHECK(settling_time(t, flat, t0, 3.0, opt) == 0.0);
    const std::vector<double> low(t.size(), 200.0);
    CHECK_FALSE(settling_time(t, low, t0, 3.0, opt).has_value());
}

TEST_CASE("metrics of a synthetic trace") {
    Trace trace({"t", "bus_vrms", "bus_freq", "a_p", "a_pinst", "b_p", "b_pinst", "load_p", "fault_p"});
    for (int k = 0; k <= 2000; ++k) {
        const double t = k * 1e-3;
        const double scale = t < 1.0 ? 1.0 : 0.5;
        trace.append(std::vector<double>{t, 230.0, 50.1, 600.0 * scale, 600.0 * scale, 300.0 * scale,
                                         300.0 * scale, 900.0 * scale, 0.0});
    }
    EventSchedule schedule{{1.0, {GridEvent::Kind::load_delta, -450.0}}};
    MetricsOptions opt;
    opt.unit_names = {"a", "b"};
    const auto m = compute_metrics(trace, schedule, opt);

    REQUIRE(m.settling.size() == 1);
    CHECK(m.settling[0].settling_time == 0.0);
    CHECK(m.settling[0].label == "load_delta");
    REQUIRE(m.shares.size() == 2);
    for (const auto& w : m.shares) {
        CHECK(w.shares[0] == doctest::Approx(2.0 / 3));
        CHECK(w.shares[1] == doctest::Approx(1.0 / 3));
    }
    CHECK(m.shares[0].t0 == 0.5);
    CHECK(m.shares[1].t0 == doctest::Approx(1.1));
    CHECK(m.max_power_balance_residual == doctest::Approx(0.0));
    CHECK(m.max_frequency_deviation == doctest::Approx(0.1));
    REQUIRE(m.power_steps.size() == 2);
    CHECK(m.power_steps[0].source == "a");
    CHECK(*m.power_steps[0].settled_delta == doctest::Approx(-300.0));
    CHECK(*m.power_steps[0].one_cycle_delta == doctest::Approx(-300.0));
    CHECK_FALSE(m.fault_max_rms.has_value());

    CHECK_THROWS_AS(compute_metrics(Trace({"t", "bus_vrms"}), schedule, opt), std::invalid_argument);
}

TEST_CASE("trace access") {
    Trace trace({"t", "x"});
    for (int k = 0; k < 10; ++k) trace.append(std::vector<double>{k * 0.1, k * 1.0});
    CHECK(trace.rows() == 10);
    CHECK(trace.has("x"));
    CHECK_FALSE(trace.has("y"));
    CHECK(trace.mean("x", 0.2, 0.4) == doctest::Approx(3.0));
    CHECK(trace.at("x", 0.55) == 5.0);
    CHECK(trace.lower_index(0.35) == 4);
    CHECK_THROWS_AS(trace.column("y"), std::out_of_range);
    CHECK_THROWS_AS(trace.mean("x", 5.0, 6.0), std::out_of_range);
    CHECK_THROWS_AS(trace.append(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("orbit calibration") {
    const double peak = calibrate_orbit_peak(OscillatorParams{});
    CHECK(peak > 0.5);
    CHECK(peak < 2.0);
    OscillatorParams lossy;
    lossy.sigma = 0.05;
    CHECK(calibrate_orbit_peak(lossy) < OscillatorState{}.v_osc);
}
