#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dzvoc/signals.hpp"
#include "support.hpp"

using namespace dzvoc;
using dzvoc::test::uniform;

namespace {

constexpr double kTwoThirdsPi = 2.0 * std::numbers::pi / 3.0;

ThreePhase random_phase() { return {uniform(-400, 400), uniform(-400, 400), uniform(-400, 400)}; }

ThreePhase balanced(double amplitude, double theta) {
    return {amplitude * std::cos(theta), amplitude * std::cos(theta - kTwoThirdsPi),
            amplitude * std::cos(theta + kTwoThirdsPi)};
}

}  // namespace

TEST_CASE("clarke of a balanced set") {
    const double a = 326.6;
    for (int k = 0; k < 360; ++k) {
        const double theta = k * std::numbers::pi / 180.0;
        const auto ab = clarke(balanced(a, theta));
        CHECK(ab.alpha == doctest::Approx(std::sqrt(1.5) * a * std::cos(theta)).epsilon(1e-12));
        CHECK(ab.beta == doctest::Approx(std::sqrt(1.5) * a * std::sin(theta)).epsilon(1e-12));
    }
}

TEST_CASE("inverse clarke of the alpha unit vector") {
    const auto x = inverse_clarke({std::sqrt(1.5), 0.0});
    CHECK(x.a == doctest::Approx(1.0));
    CHECK(x.b == doctest::Approx(-0.5));
    CHECK(x.c == doctest::Approx(-0.5));
}

TEST_CASE("clarke is linear") {
    for (int n = 0; n < 1000; ++n) {
        const auto x = random_phase(), y = random_phase();
        const double s = uniform(-3, 3), t = uniform(-3, 3);
        const auto lhs = clarke(s * x + t * y);
        const auto cx = clarke(x), cy = clarke(y);
        CHECK(std::abs(lhs.alpha - (s * cx.alpha + t * cy.alpha)) < 1e-9);
        CHECK(std::abs(lhs.beta - (s * cx.beta + t * cy.beta)) < 1e-9);
    }
}

TEST_CASE("clarke round trip on zero-sequence-free signals") {
    for (int n = 0; n < 1000; ++n) {
        auto x = random_phase();
        const double zero = x.sum() / 3.0;
        x -= ThreePhase{zero, zero, zero};
        const auto back = inverse_clarke(clarke(x));
        CHECK(std::abs(back.a - x.a) <= 1e-12 * 400);
        CHECK(std::abs(back.b - x.b) <= 1e-12 * 400);
        CHECK(std::abs(back.c - x.c) <= 1e-12 * 400);

        const AlphaBeta ab{uniform(-500, 500), uniform(-500, 500)};
        const auto ab2 = clarke(inverse_clarke(ab));
        CHECK(std::abs(ab2.alpha - ab.alpha) < 1e-12 * 500);
        CHECK(std::abs(ab2.beta - ab.beta) < 1e-12 * 500);
    }
}

TEST_CASE("clarke is power invariant") {
    for (int n = 0; n < 1000; ++n) {
        auto x = random_phase();
        const double zero = x.sum() / 3.0;
        x -= ThreePhase{zero, zero, zero};
        const auto ab = clarke(x);
        const double lhs = x.sum_of_squares();
        const double rhs = ab.alpha * ab.alpha + ab.beta * ab.beta;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
    }
}

TEST_CASE("balanced alpha-beta magnitude is constant") {
    for (int k = 0; k < 200; ++k) {
        const auto ab = clarke(balanced(100.0, 0.05 * k));
        CHECK(ab.magnitude() == doctest::Approx(100.0 * std::sqrt(1.5)).epsilon(1e-12));
    }
    CHECK(clarke({}) == AlphaBeta{});
    CHECK(inverse_clarke({}) == ThreePhase{});
}

TEST_CASE("alpha-beta magnitude and angle") {
    const AlphaBeta ab{3.0, 4.0};
    CHECK(ab.magnitude() == doctest::Approx(5.0));
    CHECK(ab.angle() == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("collective rms of a balanced set is the phase rms") {
    for (double theta : {0.0, 0.3, 1.7, 4.0}) {
        CHECK(collective_rms(balanced(230.0 * std::sqrt(2.0), theta)) == doctest::Approx(230.0).epsilon(1e-12));
    }
}

TEST_CASE("sliding rms of a sinusoid over one period") {
    const double dt = 1e-5;
    for (double amplitude : {1.0, 326.6}) {
        SlidingRms rms(dt, 0.02);
        double value = 0.0;
        for (int k = 0; k < 10000; ++k) value = rms.push(amplitude * std::sin(2 * std::numbers::pi * 50 * k * dt + 0.4));
        CHECK(value == doctest::Approx(amplitude / std::sqrt(2.0)).epsilon(1e-3));
    }
}

TEST_CASE("sliding rms of constants and square waves") {
    SlidingRms constant(1e-5);
    SlidingRms negative(1e-5);
    SlidingRms square(1e-5);
    for (int k = 0; k < 4000; ++k) {
        constant.push(5.0);
        negative.push(-3.0);
        square.push((k / 500) % 2 ? 7.0 : -7.0);
    }
    CHECK(constant.value() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(negative.value() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(square.value() == doctest::Approx(7.0).epsilon(1e-12));
    SlidingRms early(1e-5);
    CHECK(early.push(2.0) == doctest::Approx(2.0));
}

TEST_CASE("sliding window before and after filling") {
    SlidingWindow w(4);
    CHECK(w.mean() == 0.0);
    w.push(2.0);
    w.push(4.0);
    CHECK(w.size() == 2);
    CHECK(w.mean() == doctest::Approx(3.0));
    for (double x : {1.0, 1.0, 1.0, 1.0}) w.push(x);
    CHECK(w.full());
    CHECK(w.mean() == doctest::Approx(1.0));
    w.reset();
    CHECK(w.size() == 0);
    CHECK(SlidingWindow(0).capacity() == 1);
}

TEST_CASE("window samples") {
    CHECK(window_samples(0.02, 1e-5) == 2000);
    CHECK(window_samples(0.02, 2e-6) == 10000);
    CHECK_THROWS_AS(window_samples(0.02, 0.0), std::invalid_argument);
}

TEST_CASE("zero crossings and frequency estimate") {
    const double dt = 1e-5;
    std::vector<double> xs;
    for (int k = 0; k < 20000; ++k) xs.push_back(std::sin(2 * std::numbers::pi * 49.3 * k * dt - 0.2));
    const auto crossings = rising_zero_crossings(xs, dt);
    REQUIRE(crossings.size() >= 9);
    // first rising crossing where 2π·49.3·t − 0.2 = 0
    CHECK(crossings.front() == doctest::Approx(0.2 / (2 * std::numbers::pi * 49.3)).epsilon(1e-4));
    CHECK(estimate_frequency(xs, dt) == doctest::Approx(49.3).epsilon(1e-6));

    std::vector<double> fifty;
    for (int k = 0; k < 10000; ++k) fifty.push_back(std::cos(100 * std::numbers::pi * k * dt));
    CHECK(estimate_frequency(fifty, dt) == doctest::Approx(50.0).epsilon(2e-4));

    const std::vector<double> flat(100, 1.0);
    CHECK_THROWS_AS(estimate_frequency(flat, dt), InsufficientCrossingsError);
}

TEST_CASE("frequency tracker") {
    const double dt = 1e-5;
    FrequencyTracker f(dt);
    CHECK(f.value() == 0.0);
    for (int k = 0; k < 10000; ++k) f.push(std::sin(2 * std::numbers::pi * 50.2 * k * dt));
    CHECK(f.value() == doctest::Approx(50.2).epsilon(1e-5));
}
