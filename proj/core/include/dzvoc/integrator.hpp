#pragma once

// Fixed-step explicit integrators over fixed-size or dynamic flat state vectors.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace dzvoc {

enum class IntegratorKind { rk4, euler };

std::string_view to_string(IntegratorKind k);
/// Throws std::invalid_argument for unknown names.
IntegratorKind parse_integrator(std::string_view name);

namespace detail {

template <typename State>
void resize_like(State& target, const State& source) {
    if constexpr (requires { target.resize(source.size()); }) {
        target.resize(source.size());
    }
}

template <typename State>
void axpy(State& out, const State& x, double h, const State& dx) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] + h * dx[i];
    }
}

}  // namespace detail

/// Classic fourth-order Runge-Kutta. `deriv(x, dxdt)` writes the derivative
/// of `x` into `dxdt`. Scratch vectors are kept between steps.
template <typename State>
class Rk4 {
public:
    template <typename Deriv>
    void step(State& x, double dt, Deriv&& deriv) {
        detail::resize_like(k1_, x);
        detail::resize_like(k2_, x);
        detail::resize_like(k3_, x);
        detail::resize_like(k4_, x);
        detail::resize_like(work_, x);

        deriv(x, k1_);
        detail::axpy(work_, x, 0.5 * dt, k1_);
        deriv(work_, k2_);
        detail::axpy(work_, x, 0.5 * dt, k2_);
        deriv(work_, k3_);
        detail::axpy(work_, x, dt, k3_);
        deriv(work_, k4_);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

private:
    State k1_{}, k2_{}, k3_{}, k4_{}, work_{};
};

template <typename State>
class ForwardEuler {
public:
    template <typename Deriv>
    void step(State& x, double dt, Deriv&& deriv) {
        detail::resize_like(k_, x);
        deriv(x, k_);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += dt * k_[i];
        }
    }

private:
    State k_{};
};

/// Runtime-selected integrator for the engine.
template <typename State>
class Integrator {
public:
    explicit Integrator(IntegratorKind kind = IntegratorKind::rk4) : kind_(kind) {}

    template <typename Deriv>
    void step(State& x, double dt, Deriv&& deriv) {
        if (kind_ == IntegratorKind::rk4) {
            rk4_.step(x, dt, deriv);
        } else {
            euler_.step(x, dt, deriv);
        }
    }

    IntegratorKind kind() const { return kind_; }

private:
    IntegratorKind kind_;
    Rk4<State> rk4_;
    ForwardEuler<State> euler_;
};

}  // namespace dzvoc
