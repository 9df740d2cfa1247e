#include "dzvoc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dzvoc {

namespace {

const double kSqrt2Over3 = std::sqrt(2.0 / 3.0);
const double kSqrt3Over2 = std::sqrt(3.0) / 2.0;

}  // namespace

double AlphaBeta::magnitude() const { return std::hypot(alpha, beta); }

double AlphaBeta::angle() const { return std::atan2(beta, alpha); }

AlphaBeta clarke(const ThreePhase& x) {
    return {kSqrt2Over3 * (x.a - 0.5 * x.b - 0.5 * x.c),
            kSqrt2Over3 * kSqrt3Over2 * (x.b - x.c)};
}

ThreePhase inverse_clarke(const AlphaBeta& x) {
    // Transpose of the (orthonormal) forward rows.
    const double half_alpha = 0.5 * x.alpha;
    const double beta_term = kSqrt3Over2 * x.beta;
    return {kSqrt2Over3 * x.alpha,
            kSqrt2Over3 * (-half_alpha + beta_term),
            kSqrt2Over3 * (-half_alpha - beta_term)};
}

double collective_rms(const ThreePhase& x) { return std::sqrt(x.sum_of_squares() / 3.0); }

SlidingWindow::SlidingWindow(std::size_t length) : buffer_(std::max<std::size_t>(length, 1), 0.0) {}

double SlidingWindow::push(double sample) {
    if (filled_ == buffer_.size()) {
        sum_ -= buffer_[head_];
    } else {
        ++filled_;
    }
    buffer_[head_] = sample;
    sum_ += sample;
    if (++head_ == buffer_.size()) {
        head_ = 0;
        if (full()) {
            sum_ = std::accumulate(buffer_.begin(), buffer_.end(), 0.0);
        }
    }
    return mean();
}

double SlidingWindow::mean() const {
    return filled_ == 0 ? 0.0 : sum_ / static_cast<double>(filled_);
}

void SlidingWindow::reset() {
    std::fill(buffer_.begin(), buffer_.end(), 0.0);
    head_ = 0;
    filled_ = 0;
    sum_ = 0.0;
}

std::size_t window_samples(double window_s, double dt) {
    if (!(dt > 0.0) || !(window_s > 0.0)) {
        throw std::invalid_argument("window and step must be positive");
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_s / dt)));
}

SlidingRms::SlidingRms(double dt, double window_s)
    : window_s_(window_s), squares_(window_samples(window_s, dt)) {}

double SlidingRms::push(double sample) {
    squares_.push(sample * sample);
    return value();
}

double SlidingRms::value() const {
    // Rounding in the running sum can leave a tiny negative residue.
    return std::sqrt(std::max(0.0, squares_.mean()));
}

SlidingMean::SlidingMean(double dt, double window_s) : values_(window_samples(window_s, dt)) {}

InsufficientCrossingsError::InsufficientCrossingsError(std::size_t found)
    : std::runtime_error("frequency estimate needs at least 2 rising zero crossings, found " +
                         std::to_string(found)),
      found_(found) {}

std::vector<double> rising_zero_crossings(std::span<const double> samples, double dt, double t0) {
    std::vector<double> crossings;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double prev = samples[i - 1];
        const double curr = samples[i];
        if (prev < 0.0 && curr >= 0.0) {
            const double fraction = -prev / (curr - prev);
            crossings.push_back(t0 + (static_cast<double>(i - 1) + fraction) * dt);
        }
    }
    return crossings;
}

double estimate_frequency(std::span<const double> samples, double dt) {
    const auto crossings = rising_zero_crossings(samples, dt);
    if (crossings.size() < 2) {
        throw InsufficientCrossingsError(crossings.size());
    }
    const double span = crossings.back() - crossings.front();
    return static_cast<double>(crossings.size() - 1) / span;
}

double FrequencyTracker::push(double sample) {
    if (has_previous_ && previous_ < 0.0 && sample >= 0.0) {
        const double crossing = time_ - dt_ + dt_ * (-previous_ / (sample - previous_));
        if (last_crossing_ >= 0.0 && crossing > last_crossing_) {
            frequency_ = 1.0 / (crossing - last_crossing_);
        }
        last_crossing_ = crossing;
    }
    previous_ = sample;
    has_previous_ = true;
    time_ += dt_;
    return frequency_;
}

}  // namespace dzvoc
