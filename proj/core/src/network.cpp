#include "dzvoc/network.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dzvoc {

std::vector<std::string> FilterParams::violations() const {
    std::vector<std::string> out;
    for (auto [name, value] : {std::pair{"r_f", r_f}, std::pair{"l_f", l_f}, std::pair{"c_f", c_f}}) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            std::ostringstream msg;
            msg << name << " must be positive and finite (got " << value << ")";
            out.push_back(msg.str());
        }
    }
    return out;
}

InverterUnit scale_unit_for_capacity(const InverterUnit& base, double s_k) {
    if (!(s_k > 0.0) || s_k > 1.0) {
        std::ostringstream msg;
        msg << "capacity scale must be in (0, 1] (got " << s_k << ")";
        throw std::invalid_argument(msg.str());
    }
    InverterUnit unit = base;
    unit.capacity_scale = base.capacity_scale * s_k;
    unit.gains.i_gain = base.gains.i_gain / s_k;
    unit.osc.r_s = base.osc.r_s / s_k;
    unit.filter.r_f = base.filter.r_f / s_k;
    unit.filter.l_f = base.filter.l_f / s_k;
    unit.filter.c_f = base.filter.c_f * s_k;
    return unit;
}

std::string_view to_string(PvMode m) { return m == PvMode::averaged ? "averaged" : "switched"; }

PvMode parse_pv_mode(std::string_view name) {
    if (name == "averaged") return PvMode::averaged;
    if (name == "switched") return PvMode::switched;
    throw std::invalid_argument("unknown PV mode '" + std::string(name) + "' (expected averaged or switched)");
}

ThreePhase load_phase(std::span<const double> x, std::size_t offset) {
    return {x[offset], x[offset + 1], x[offset + 2]};
}

void store_phase(std::span<double> x, std::size_t offset, const ThreePhase& v) {
    x[offset] = v.a;
    x[offset + 1] = v.b;
    x[offset + 2] = v.c;
}

std::string_view to_string(GridEvent::Kind k) {
    switch (k) {
        case GridEvent::Kind::load_set: return "load_set";
        case GridEvent::Kind::load_delta: return "load_delta";
        case GridEvent::Kind::fault_on: return "fault_on";
        case GridEvent::Kind::fault_off: return "fault_off";
        case GridEvent::Kind::pv_disconnect: return "pv_disconnect";
        case GridEvent::Kind::pv_connect: return "pv_connect";
    }
    return "?";
}

GridEvent::Kind parse_event_kind(std::string_view name) {
    using K = GridEvent::Kind;
    for (K k : {K::load_set, K::load_delta, K::fault_on, K::fault_off, K::pv_disconnect, K::pv_connect}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown event kind '" + std::string(name) + "'");
}

double load_conductance_for(double p, double v_phase_rms) { return p / (3.0 * v_phase_rms * v_phase_rms); }

GridModel::GridModel(std::vector<InverterUnit> units_in, std::optional<PvUnit> pv_in, double load_power_in,
                     double v_nominal_rms_in)
    : units(std::move(units_in)), pv(std::move(pv_in)), v_nominal_rms(v_nominal_rms_in) {
    if (units.empty()) {
        throw std::invalid_argument("grid needs at least one grid-forming unit");
    }
    state.assign(layout().size(), 0.0);
    set_load_power(load_power_in);
}

double GridModel::bus_capacitance() const {
    double c = 0.0;
    for (const auto& u : units) c += u.filter.c_f;
    return c;
}

double GridModel::nominal_phase_peak() const { return v_nominal_rms * std::numbers::sqrt2; }

ThreePhase GridModel::pv_injection(std::span<const double> x) const {
    if (!pv || !pv->source.connected) {
        return {};
    }
    return pv->mode == PvMode::averaged ? pv->i_ref : load_phase(x, layout().pv());
}

void GridModel::set_load_power(double p) {
    if (!(p > 0.0)) {
        std::ostringstream msg;
        msg << "load power must stay positive (requested " << p << " W)";
        throw std::invalid_argument(msg.str());
    }
    load_power = p;
    load_conductance = load_conductance_for(p, v_nominal_rms);
}

void grid_derivative(const GridModel& g, std::span<const double> x, std::span<const ThreePhase> emf,
                     const PvDrive& pv, std::span<double> dxdt) {
    const GridLayout lay = g.layout();
    const ThreePhase v_bus = load_phase(x, lay.bus());

    ThreePhase bus_current;
    for (std::size_t k = 0; k < lay.units; ++k) {
        const auto& f = g.units[k].filter;
        const ThreePhase i_f = load_phase(x, lay.filter(k));
        store_phase(dxdt, lay.filter(k), (emf[k] - f.r_f * i_f - v_bus) * (1.0 / f.l_f));
        bus_current += i_f;
    }

    ThreePhase di_pv;
    if (g.pv && g.pv->source.connected) {
        if (g.pv->mode == PvMode::averaged) {
            bus_current += pv.injection;
        } else {
            const ThreePhase i_pv = load_phase(x, lay.pv());
            // Floating converter neutral: the three PV currents sum to a constant.
            const double v_n = (pv.leg_voltage.sum() - g.pv->r * i_pv.sum() - v_bus.sum()) / 3.0;
            const ThreePhase across = pv.leg_voltage - ThreePhase{v_n, v_n, v_n} - g.pv->r * i_pv - v_bus;
            di_pv = across * (1.0 / g.pv->l);
            bus_current += i_pv;
        }
    }
    store_phase(dxdt, lay.pv(), di_pv);

    const double shunt = g.load_conductance + g.fault_conductance;
    store_phase(dxdt, lay.bus(), (bus_current - shunt * v_bus) * (1.0 / g.bus_capacitance()));
}

ThreePhase leg_voltages(const std::array<SwitchState, 3>& sw, double v_dc) {
    const auto leg = [v_dc](SwitchState s) { return s == SwitchState::high ? 0.5 * v_dc : -0.5 * v_dc; };
    return {leg(sw[0]), leg(sw[1]), leg(sw[2])};
}

void apply_event(GridModel& g, const GridEvent& e) {
    using K = GridEvent::Kind;
    switch (e.kind) {
        case K::load_set:
            g.set_load_power(e.value);
            break;
        case K::load_delta:
            g.set_load_power(g.load_power + e.value);
            break;
        case K::fault_on:
            if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
                throw std::invalid_argument("fault conductance must be finite and non-negative");
            }
            g.fault_conductance = e.value;
            break;
        case K::fault_off:
            g.fault_conductance = 0.0;
            break;
        case K::pv_disconnect:
        case K::pv_connect:
            if (!g.pv) {
                throw std::invalid_argument(std::string(to_string(e.kind)) + " on a grid without PV");
            }
            g.pv->source.connected = e.kind == K::pv_connect;
            // The contactor interrupts the PV current.
            store_phase(g.state, g.layout().pv(), {});
            g.pv->i_ref = {};
            break;
    }
}

double instantaneous_power(const GridModel& g, const PowerTap& tap) {
    const ThreePhase v = g.bus_voltage();
    switch (tap.kind) {
        case PowerTap::Kind::unit:
            return v.dot(g.filter_current(tap.index));
        case PowerTap::Kind::pv:
            return v.dot(g.pv_injection(g.state));
        case PowerTap::Kind::load:
            return g.load_conductance * v.sum_of_squares();
        case PowerTap::Kind::fault:
            return g.fault_conductance * v.sum_of_squares();
    }
    return 0.0;
}

double stored_energy_rate(const GridModel& g, std::span<const double> x, std::span<const double> dxdt) {
    const std::size_t bus = g.layout().bus();
    return g.bus_capacitance() * load_phase(x, bus).dot(load_phase(dxdt, bus));
}

PowerMeter::PowerMeter(PowerTap tap, double dt, double window_s) : tap_(tap), mean_(dt, window_s) {}

const PowerMeasurement& PowerMeter::update(const GridModel& g) {
    last_.instantaneous = instantaneous_power(g, tap_);
    last_.average = mean_.push(last_.instantaneous);
    return last_;
}

PowerMeasurement measure_power(const GridModel& g, const PowerTap& tap) {
    const double p = instantaneous_power(g, tap);
    return {p, p};
}

}  // namespace dzvoc
