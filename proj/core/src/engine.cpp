#include "dzvoc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dzvoc {

std::string_view to_string(IntegratorKind k) { return k == IntegratorKind::rk4 ? "rk4" : "euler"; }

IntegratorKind parse_integrator(std::string_view name) {
    if (name == "rk4") return IntegratorKind::rk4;
    if (name == "euler") return IntegratorKind::euler;
    throw std::invalid_argument("unknown integrator '" + std::string(name) + "' (expected rk4 or euler)");
}

std::string_view to_string(VrlMeasurement m) {
    return m == VrlMeasurement::instantaneous ? "instantaneous" : "windowed";
}

VrlMeasurement parse_vrl_measurement(std::string_view name) {
    if (name == "instantaneous") return VrlMeasurement::instantaneous;
    if (name == "windowed") return VrlMeasurement::windowed;
    throw std::invalid_argument("unknown VRL measurement '" + std::string(name) +
                                "' (expected instantaneous or windowed)");
}

// ---------------------------------------------------------------------------
// SimConfig / EventSchedule

std::vector<std::string> SimConfig::violations(const GridModel& grid) const {
    std::vector<std::string> out;
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        out.push_back("dt must be positive");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        out.push_back("t_end must be positive");
    }
    if (decimation < 1) {
        out.push_back("decimation must be at least 1");
    }
    if (!(startup >= 0.0)) {
        out.push_back("startup must be non-negative");
    }
    if (grid.pv && grid.pv->mode == PvMode::switched && dt > kMaxSwitchedStep * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << dt << " s exceeds " << kMaxSwitchedStep << " s required for switched PV";
        out.push_back(msg.str());
    }
    return out;
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

EventSchedule::EventSchedule(std::initializer_list<TimedEvent> events) {
    for (const auto& e : events) add(e.time, e.event);
}

void EventSchedule::add(double time, const GridEvent& event) {
    if (!(time >= 0.0) || !std::isfinite(time)) {
        throw std::invalid_argument("event time must be finite and non-negative");
    }
    const auto pos = std::upper_bound(events_.begin(), events_.end(), time,
                                      [](double t, const TimedEvent& e) { return t < e.time; });
    events_.insert(pos, TimedEvent{time, event});
}

// ---------------------------------------------------------------------------
// Trace

Trace::Trace(std::vector<std::string> columns) : names_(std::move(columns)), data_(names_.size()) {}

void Trace::append(std::span<const double> row) {
    if (row.size() != names_.size()) {
        throw std::invalid_argument("trace row width does not match the column count");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
        data_[i].push_back(row[i]);
    }
}

bool Trace::has(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Trace::index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw std::out_of_range("trace has no column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> Trace::column(std::string_view name) const { return data_[index_of(name)]; }

std::size_t Trace::lower_index(double t) const {
    const auto ts = time();
    return static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), t) - ts.begin());
}

double Trace::mean(std::string_view name, double t0, double t1) const {
    const auto ts = time();
    const auto xs = column(name);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = lower_index(t0); i < ts.size() && ts[i] <= t1; ++i) {
        sum += xs[i];
        ++n;
    }
    if (n == 0) {
        std::ostringstream msg;
        msg << "no samples of '" << name << "' in [" << t0 << ", " << t1 << "]";
        throw std::out_of_range(msg.str());
    }
    return sum / static_cast<double>(n);
}

double Trace::at(std::string_view name, double t) const {
    const auto ts = time();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) {
        throw std::out_of_range("trace starts after the requested time");
    }
    return column(name)[static_cast<std::size_t>(it - ts.begin()) - 1];
}

// ---------------------------------------------------------------------------
// Metrics

std::optional<double> settling_time(std::span<const double> t, std::span<const double> rms, double from,
                                    double until, const MetricsOptions& opt) {
    const double lo = opt.v_nominal_rms * (1.0 - opt.band);
    const double hi = opt.v_nominal_rms * (1.0 + opt.band);
    const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), from) - t.begin());
    // Candidate start: first sample of the current in-band run.
    std::optional<std::size_t> run_start;
    for (std::size_t i = first; i < t.size() && t[i] <= until; ++i) {
        const bool inside = rms[i] >= lo && rms[i] <= hi;
        if (!inside) {
            run_start.reset();
            continue;
        }
        if (!run_start) run_start = i;
        if (t[i] - t[*run_start] >= opt.hold - 1e-12) {
            return std::max(0.0, t[*run_start] - from);
        }
    }
    return std::nullopt;
}

namespace {

struct Segment {
    double t0;
    double t1;
};

std::vector<Segment> settled_segments(const Trace& trace, const EventSchedule& schedule, const MetricsOptions& opt) {
    std::vector<Segment> out;
    if (trace.rows() == 0) return out;
    const double end = trace.time().back();
    double start = opt.startup;
    for (const auto& e : schedule.events()) {
        if (e.time > start) out.push_back({start, e.time});
        start = std::max(start, e.time + opt.exclusion);
    }
    if (end > start) out.push_back({start, end});
    return out;
}

/// Mean over a settled segment. The sample at the closing event time is
/// recorded after the event was applied, so it belongs to the next segment.
double segment_mean(const Trace& trace, std::string_view name, const Segment& seg) {
    return trace.mean(name, seg.t0, seg.t1 - 1e-9);
}

bool has_samples(const Trace& trace, const Segment& seg) {
    return trace.lower_index(seg.t0) < trace.lower_index(seg.t1 - 1e-9);
}

bool during_fault(double t, const EventSchedule& schedule) {
    bool faulted = false;
    for (const auto& e : schedule.events()) {
        if (e.time > t) break;
        if (e.event.kind == GridEvent::Kind::fault_on && e.event.value > 0.0) faulted = true;
        if (e.event.kind == GridEvent::Kind::fault_off) faulted = false;
    }
    return faulted;
}

}  // namespace

ScenarioMetrics compute_metrics(const Trace& trace, const EventSchedule& schedule, const MetricsOptions& opt) {
    if (trace.rows() == 0) {
        throw std::invalid_argument("cannot compute metrics of an empty trace");
    }
    ScenarioMetrics m;
    const auto t = trace.time();
    const auto rms = trace.column("bus_vrms");
    const double end = t.back();

    const auto& events = schedule.events();
    for (std::size_t k = 0; k < events.size(); ++k) {
        const double until = k + 1 < events.size() ? events[k + 1].time : end;
        EventSettling s;
        s.event_time = events[k].time;
        s.label = std::string(to_string(events[k].event.kind));
        s.settling_time = settling_time(t, rms, events[k].time, until, opt);
        m.settling.push_back(std::move(s));
    }

    const bool has_pv = trace.has("pv_p");
    for (const auto& seg : settled_segments(trace, schedule, opt)) {
        if (!has_samples(trace, seg)) continue;
        ShareWindow w{seg.t0, seg.t1, {}, {}};
        double total = 0.0;
        for (const auto& name : opt.unit_names) {
            w.mean_power.push_back(segment_mean(trace, name + "_p", seg));
            total += w.mean_power.back();
        }
        for (double p : w.mean_power) {
            w.shares.push_back(total != 0.0 ? p / total : 0.0);
        }
        const double load = segment_mean(trace, "load_p", seg);
        const double fault = segment_mean(trace, "fault_p", seg);
        const double pv = has_pv ? segment_mean(trace, "pv_p", seg) : 0.0;
        if (load + fault > 0.0) {
            const double residual = std::abs(total + pv - load - fault) / (load + fault);
            m.max_power_balance_residual = std::max(m.max_power_balance_residual, residual);
        }
        m.shares.push_back(std::move(w));
    }

    // Fault RMS: from one RMS window after fault_on until fault_off.
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (events[k].event.kind != GridEvent::Kind::fault_on) continue;
        double off = end;
        for (std::size_t j = k + 1; j < events.size(); ++j) {
            if (events[j].event.kind == GridEvent::Kind::fault_off) {
                off = events[j].time;
                break;
            }
        }
        for (std::size_t i = trace.lower_index(events[k].time + opt.rms_window); i < t.size() && t[i] <= off; ++i) {
            m.fault_min_rms = std::min(m.fault_min_rms.value_or(rms[i]), rms[i]);
            m.fault_max_rms = std::max(m.fault_max_rms.value_or(rms[i]), rms[i]);
        }
    }

    const auto segments = settled_segments(trace, schedule, opt);
    std::vector<std::string> sources = opt.unit_names;
    if (has_pv) sources.emplace_back("pv");
    for (const auto& e : events) {
        const Segment* before = nullptr;
        const Segment* after = nullptr;
        for (const auto& seg : segments) {
            if (std::abs(seg.t1 - e.time) < 1e-9) before = &seg;
            if (!after && seg.t0 > e.time) after = &seg;
        }
        for (const auto& name : sources) {
            PowerStep step{e.time, std::string(to_string(e.event.kind)), name, {}, {}};
            if (before && has_samples(trace, *before)) {
                const double p0 = segment_mean(trace, name + "_p", *before);
                if (after && has_samples(trace, *after)) {
                    step.settled_delta = segment_mean(trace, name + "_p", *after) - p0;
                }
                const std::size_t i = trace.lower_index(e.time + 1.0 / kNominalFrequency - 1e-9);
                if (i < t.size()) step.one_cycle_delta = trace.column(name + "_pinst")[i] - p0;
            }
            m.power_steps.push_back(std::move(step));
        }
    }

    const auto freq = trace.column("bus_freq");
    for (const auto& seg : segments) {
        if (during_fault(seg.t0, schedule)) continue;
        for (std::size_t i = trace.lower_index(seg.t0); i < t.size() && t[i] <= seg.t1; ++i) {
            if (freq[i] <= 0.0) continue;
            m.max_frequency_deviation = std::max(m.max_frequency_deviation, std::abs(freq[i] - kNominalFrequency));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Simulation

DivergenceError::DivergenceError(double time, const std::string& what)
    : std::runtime_error(what), time_(time) {}

double calibrate_orbit_peak(const OscillatorParams& p, double duration, double dt) {
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    const auto tail = std::min(steps, window_samples(10.0 / kNominalFrequency, dt));
    const FeedbackGains no_feedback{0.0, 0.0};
    std::array<double, 2> x{OscillatorState{}.v_osc, OscillatorState{}.i_l};
    Rk4<std::array<double, 2>> rk4;
    double peak = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        rk4.step(x, dt, [&](const std::array<double, 2>& s, std::array<double, 2>& ds) {
            const auto d = oscillator_derivative({s[0], s[1]}, 0.0, p, no_feedback);
            ds = {d.dv_osc, d.di_l};
        });
        if (k + tail > steps) peak = std::max(peak, std::abs(x[0]));
    }
    if (!(peak > 0.0) || !std::isfinite(peak)) {
        throw std::runtime_error("oscillator did not reach a limit cycle during calibration");
    }
    return peak;
}

Simulation::Simulation(GridModel grid, SimConfig config, EventSchedule schedule)
    : grid_(std::move(grid)),
      config_(config),
      schedule_(std::move(schedule)),
      integrator_(config.integrator),
      bus_rms_(config.dt),
      frequency_(config.dt) {
    if (const auto v = config_.violations(grid_); !v.empty()) {
        std::string all;
        for (const auto& s : v) all += (all.empty() ? "" : "; ") + s;
        throw std::invalid_argument("invalid simulation config: " + all);
    }
    if (grid_.state.size() != grid_.layout().size()) {
        grid_.state.assign(grid_.layout().size(), 0.0);
    }
    for (auto& u : grid_.units) {
        if (!(u.orbit_peak > 0.0)) u.orbit_peak = calibrate_orbit_peak(u.osc);
    }
    emf_.resize(grid_.units.size());

    std::vector<std::string> columns{"t", "bus_va", "bus_vb", "bus_vc", "bus_vrms", "bus_freq"};
    for (std::size_t k = 0; k < grid_.units.size(); ++k) {
        const auto& name = grid_.units[k].name;
        for (const char* suffix : {"_vosc", "_il", "_scale", "_ia", "_p", "_pinst"}) {
            columns.push_back(name + suffix);
        }
        meters_.emplace_back(PowerTap::unit(k), config_.dt);
    }
    if (grid_.pv) {
        for (const char* c : {"pv_ia", "pv_iref_a", "pv_p", "pv_pinst"}) columns.emplace_back(c);
        meters_.emplace_back(PowerTap::photovoltaic(), config_.dt);
    }
    columns.emplace_back("load_p");
    columns.emplace_back("fault_p");
    meters_.emplace_back(PowerTap::load(), config_.dt);
    meters_.emplace_back(PowerTap::fault(), config_.dt);
    trace_ = Trace(std::move(columns));
    row_.resize(trace_.columns().size());
}

double Simulation::time() const { return static_cast<double>(step_) * config_.dt; }

MetricsOptions Simulation::metrics_options() const {
    MetricsOptions opt;
    opt.v_nominal_rms = grid_.v_nominal_rms;
    opt.startup = config_.startup;
    for (const auto& u : grid_.units) opt.unit_names.push_back(u.name);
    return opt;
}

std::vector<PowerMeasurement> Simulation::power() const {
    std::vector<PowerMeasurement> out;
    out.reserve(meters_.size());
    for (const auto& m : meters_) {
        if (m.tap().kind != PowerTap::Kind::fault) out.push_back(m.value());
    }
    return out;
}

void Simulation::apply_due_events() {
    const auto& events = schedule_.events();
    while (next_event_ < events.size() &&
           static_cast<std::size_t>(std::llround(events[next_event_].time / config_.dt)) <= step_) {
        apply_event(grid_, events[next_event_].event);
        ++next_event_;
    }
}

void Simulation::measure_and_record() {
    const ThreePhase v_bus = grid_.bus_voltage();
    const double rms = bus_rms_.push(collective_rms(v_bus));
    const double freq = frequency_.push(v_bus.a);
    for (auto& m : meters_) m.update(grid_);

    if (step_ % config_.decimation != 0) return;
    std::size_t c = 0;
    row_[c++] = time();
    row_[c++] = v_bus.a;
    row_[c++] = v_bus.b;
    row_[c++] = v_bus.c;
    row_[c++] = rms;
    row_[c++] = freq;
    for (std::size_t k = 0; k < grid_.units.size(); ++k) {
        const auto& u = grid_.units[k];
        row_[c++] = u.osc_state.v_osc;
        row_[c++] = u.osc_state.i_l;
        row_[c++] = u.vrl.output;
        row_[c++] = grid_.filter_current(k).a;
        row_[c++] = meters_[k].value().average;
        row_[c++] = meters_[k].value().instantaneous;
    }
    std::size_t meter = grid_.units.size();
    if (grid_.pv) {
        row_[c++] = grid_.pv_injection(grid_.state).a;
        row_[c++] = grid_.pv->i_ref.a;
        row_[c++] = meters_[meter].value().average;
        row_[c++] = meters_[meter++].value().instantaneous;
    }
    row_[c++] = meters_[meter++].value().average;
    row_[c++] = meters_[meter].value().average;
    trace_.append(row_);
}

void Simulation::update_controllers() {
    const ThreePhase v_bus = grid_.bus_voltage();
    const double v_meas = config_.vrl_measurement == VrlMeasurement::instantaneous ? collective_rms(v_bus)
                                                                                   : bus_rms_.value();
    for (auto& u : grid_.units) {
        vrl_fault_guard(u.vrl, v_meas, config_.dt);
        vrl_step(u.vrl, v_meas, config_.dt);
    }

    if (!grid_.pv) return;
    auto& pv = *grid_.pv;
    pv.i_ref = pv_reference(pv.source, clarke(v_bus), grid_.nominal_phase_peak());
    pv_drive_.injection = pv.i_ref;
    if (pv.mode == PvMode::switched && pv.source.connected) {
        const ThreePhase i_pv = grid_.pv_current();
        if (time() >= config_.startup) {
            const ThreePhase err = i_pv - pv.i_ref;
            const double worst = std::max({std::abs(err.a), std::abs(err.b), std::abs(err.c)});
            max_tracking_error_ = std::max(max_tracking_error_, worst);
            tracking_seen_ = true;
        }
        pv_drive_.leg_voltage = leg_voltages(hysteresis_step(pv.hysteresis, i_pv, pv.i_ref), pv.source.v_dc);
    }
}

void Simulation::pack(std::vector<double>& x) const {
    const std::size_t n = grid_.units.size();
    x.resize(2 * n + grid_.state.size());
    for (std::size_t k = 0; k < n; ++k) {
        x[2 * k] = grid_.units[k].osc_state.v_osc;
        x[2 * k + 1] = grid_.units[k].osc_state.i_l;
    }
    std::copy(grid_.state.begin(), grid_.state.end(), x.begin() + static_cast<std::ptrdiff_t>(2 * n));
}

void Simulation::unpack(const std::vector<double>& x) {
    const std::size_t n = grid_.units.size();
    for (std::size_t k = 0; k < n; ++k) {
        grid_.units[k].osc_state = {x[2 * k], x[2 * k + 1]};
    }
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(2 * n), x.end(), grid_.state.begin());
}

void Simulation::check_divergence(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || std::abs(x[i]) > config_.divergence_limit) {
            std::ostringstream msg;
            msg << "numerical divergence at t = " << time() << " s: state[" << i << "] = " << x[i]
                << " exceeds " << config_.divergence_limit;
            throw DivergenceError(time(), msg.str());
        }
    }
}

std::size_t Simulation::substeps() const {
    // The bus shunt (load + fault conductance across the lumped capacitance)
    // is the fastest real mode; a bolted fault puts it near 0.1 µs.
    const double rate = (grid_.load_conductance + grid_.fault_conductance) / grid_.bus_capacitance();
    const double limit = config_.integrator == IntegratorKind::rk4 ? 2.0 : 1.0;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config_.dt * rate / limit)));
}

void Simulation::integrate() {
    const std::size_t n = grid_.units.size();
    const GridLayout lay = grid_.layout();
    const std::size_t count = substeps();
    const double h = config_.dt / static_cast<double>(count);
    pack(x_);
    const auto deriv = [&](const std::vector<double>& x, std::vector<double>& dx) {
        const std::span<const double> electrical(x.data() + 2 * n, lay.size());
        for (std::size_t k = 0; k < n; ++k) {
            const auto& u = grid_.units[k];
            const OscillatorState s{x[2 * k], x[2 * k + 1]};
            const double i_alpha = clarke(load_phase(electrical, lay.filter(k))).alpha;
            const auto d = oscillator_derivative(s, i_alpha, u.osc, u.gains);
            dx[2 * k] = d.dv_osc;
            dx[2 * k + 1] = d.di_l;
            emf_[k] = pwm_reference(s, u.osc, u.gains, u.vrl.output, u.orbit_peak);
        }
        grid_derivative(grid_, electrical, emf_, pv_drive_, std::span<double>(dx.data() + 2 * n, lay.size()));
    };
    for (std::size_t sub = 0; sub < count; ++sub) integrator_.step(x_, h, deriv);
    ++step_;
    check_divergence(x_);
    unpack(x_);
}

void Simulation::step() {
    apply_due_events();
    measure_and_record();
    update_controllers();
    integrate();
}

void Simulation::run_until(double t) {
    const auto target = static_cast<std::size_t>(std::llround(t / config_.dt));
    while (step_ < target) step();
}

RunResult Simulation::run() {
    run_until(config_.t_end);
    RunResult result{trace_, compute_metrics(trace_, schedule_, metrics_options())};
    if (tracking_seen_) result.metrics.max_pv_tracking_error = max_tracking_error_;
    return result;
}

RunResult run_scenario(const SimConfig& config, const EventSchedule& schedule, GridModel grid) {
    for (const auto& e : schedule.events()) {
        if (e.time > config.t_end) {
            std::ostringstream msg;
            msg << "event '" << to_string(e.event.kind) << "' at t = " << e.time << " s is after t_end = "
                << config.t_end << " s";
            throw std::invalid_argument(msg.str());
        }
    }
    return Simulation(std::move(grid), config, schedule).run();
}

}  // namespace dzvoc
