#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cssplc/chirp.hpp"
#include "cssplc/params.hpp"
#include "cssplc/signal.hpp"

namespace cssplc {

/// Everything the receiver knows about one symbol period.
struct DemodFrame {
    Spectrum y;                        // 2^sf correlator outputs
    std::vector<double> s;             // G superbin energies
    std::vector<double> h;             // G running means of s
    std::uint32_t decision_mod = 0;    // argmax s
    std::uint32_t decision_enhanced = 0;  // argmax h
    std::uint64_t frame_index = 0;
};

/// s[g] = sum of |y[n]|^2 over the half-open bin range [g P, (g + 1) P).
/// Throws ConfigError unless P is nonzero and divides |y|.
std::vector<double> superbin_energies(std::size_t superbin_size, std::span<const Complex> y);
std::vector<double> superbin_energies(const CssParams& params, std::span<const Complex> y);

/// Argmax, lowest index on ties. Throws ParameterError on empty input.
std::uint32_t decide_mod(std::span<const double> s);
std::uint32_t decide_enhanced(std::span<const double> h);

/// Per-superbin moving average over the last Q energy vectors.
///
/// Keeps a ring buffer of depth Q and one running sum per superbin. The sums
/// are rebuilt from the buffer every time the ring wraps, which bounds
/// floating-point drift over arbitrarily long streams.
class RunningMeanState {
public:
    RunningMeanState(std::size_t superbins, std::size_t depth);

    /// Pushes one energy vector and returns the mean of the last
    /// min(Q, frames_seen) vectors.
    std::vector<double> update(std::span<const double> s);
    /// Same as update() but writes into `h` without allocating.
    void update(std::span<const double> s, std::span<double> h);

    /// Forget all frames, e.g. when the transmitter changes symbol.
    void reset();

    std::size_t depth() const noexcept { return depth_; }
    std::size_t superbins() const noexcept { return superbins_; }
    std::size_t frames_seen() const noexcept { return seen_; }
    std::size_t window_fill() const noexcept { return seen_ < depth_ ? seen_ : depth_; }

    /// Mean recomputed from the buffer contents, bypassing the running sums.
    std::vector<double> recomputed_mean() const;
    std::span<const double> running_sums() const noexcept { return sums_; }

private:
    void rebuild_sums();

    std::size_t superbins_;
    std::size_t depth_;
    std::vector<double> ring_;  // depth_ rows of superbins_ values
    std::vector<double> sums_;
    std::size_t next_ = 0;
    std::size_t seen_ = 0;
};

/// Convenience free-function form of update().
std::vector<double> update_enhanced(RunningMeanState& state, std::span<const double> s);

/// dechirp -> DFT -> superbins -> both decisions, advancing `state`.
DemodFrame demodulate_symbol(const CssParams& params, const ComplexSignal& r, RunningMeanState& state);

/// Stateful receiver owning its front end and running-mean state.
class Demodulator {
public:
    explicit Demodulator(const CssParams& params);

    DemodFrame process(std::span<const Complex> r);
    /// Reuses the buffers already held by `frame`.
    void process_into(std::span<const Complex> r, DemodFrame& frame);
    void reset();

    const CssParams& params() const noexcept { return front_.params(); }
    const RunningMeanState& state() const noexcept { return state_; }

private:
    ChirpFrontEnd front_;
    RunningMeanState state_;
    std::vector<Complex> scratch_;
    std::uint64_t frames_ = 0;
};

} // namespace cssplc
