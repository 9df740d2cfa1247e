#pragma once

// Three-phase signal algebra: Clarke transforms, sliding-window statistics
// and zero-crossing frequency estimation.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace dzvoc {

/// Instantaneous three-phase sample (volts or amperes).
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    ThreePhase& operator+=(const ThreePhase& o) { a += o.a; b += o.b; c += o.c; return *this; }
    ThreePhase& operator-=(const ThreePhase& o) { a -= o.a; b -= o.b; c -= o.c; return *this; }
    ThreePhase& operator*=(double k) { a *= k; b *= k; c *= k; return *this; }

    friend ThreePhase operator+(ThreePhase x, const ThreePhase& y) { return x += y; }
    friend ThreePhase operator-(ThreePhase x, const ThreePhase& y) { return x -= y; }
    friend ThreePhase operator*(ThreePhase x, double k) { return x *= k; }
    friend ThreePhase operator*(double k, ThreePhase x) { return x *= k; }
    friend bool operator==(const ThreePhase&, const ThreePhase&) = default;

    double sum() const { return a + b + c; }
    double sum_of_squares() const { return a * a + b * b + c * c; }
    /// Product summed over phases, i.e. instantaneous three-phase power for v·i.
    double dot(const ThreePhase& o) const { return a * o.a + b * o.b + c * o.c; }
};

/// Sample in the stationary orthogonal (alpha, beta) frame.
struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;

    friend bool operator==(const AlphaBeta&, const AlphaBeta&) = default;

    double magnitude() const;
    double angle() const;
};

/// Power-invariant Clarke transform; the zero-sequence component is dropped.
AlphaBeta clarke(const ThreePhase& x);

/// Right inverse of clarke() on zero-sequence-free signals.
ThreePhase inverse_clarke(const AlphaBeta& x);

/// RMS over all three phases of one instantaneous sample,
/// sqrt((a² + b² + c²) / 3). Equals the per-phase RMS for a balanced set.
double collective_rms(const ThreePhase& x);

/// Fixed-length ring buffer with a running sum. The sum is rebuilt from the
/// buffer once per wrap so rounding drift cannot accumulate.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t length);

    /// Pushes a sample and returns the mean over the populated part of the window.
    double push(double sample);
    double mean() const;
    std::size_t size() const { return filled_; }
    std::size_t capacity() const { return buffer_.size(); }
    bool full() const { return filled_ == buffer_.size(); }
    void reset();

private:
    std::vector<double> buffer_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    double sum_ = 0.0;
};

/// Number of samples spanning `window_s` at step `dt` (at least one).
std::size_t window_samples(double window_s, double dt);

/// Root-mean-square over a sliding window. Until the window is full the
/// result is normalized by the number of samples seen so far.
class SlidingRms {
public:
    static constexpr double kDefaultWindow = 0.02;

    SlidingRms(double dt, double window_s = kDefaultWindow);

    double push(double sample);
    double value() const;
    double window() const { return window_s_; }
    void reset() { squares_.reset(); }

private:
    double window_s_;
    SlidingWindow squares_;
};

/// Arithmetic mean over a sliding window (used for cycle-averaged power).
class SlidingMean {
public:
    SlidingMean(double dt, double window_s = SlidingRms::kDefaultWindow);

    double push(double sample) { return values_.push(sample); }
    double value() const { return values_.mean(); }
    void reset() { values_.reset(); }

private:
    SlidingWindow values_;
};

class InsufficientCrossingsError : public std::runtime_error {
public:
    explicit InsufficientCrossingsError(std::size_t found);
    std::size_t found() const { return found_; }

private:
    std::size_t found_;
};

/// Times of rising zero crossings (negative to non-negative), linearly
/// interpolated between the bracketing samples. Sample i is at t0 + i·dt.
std::vector<double> rising_zero_crossings(std::span<const double> samples, double dt, double t0 = 0.0);

/// 1 / mean spacing of rising zero crossings.
/// Throws InsufficientCrossingsError with fewer than two crossings.
double estimate_frequency(std::span<const double> samples, double dt);

/// Streaming variant of estimate_frequency(): reports the reciprocal of the
/// spacing between the two most recent rising crossings, 0 until two exist.
class FrequencyTracker {
public:
    explicit FrequencyTracker(double dt) : dt_(dt) {}

    double push(double sample);
    double value() const { return frequency_; }

private:
    double dt_;
    double time_ = 0.0;
    double previous_ = 0.0;
    bool has_previous_ = false;
    double last_crossing_ = -1.0;
    double frequency_ = 0.0;
};

}  // namespace dzvoc
