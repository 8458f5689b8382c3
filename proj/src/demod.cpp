#include "cssplc/demod.hpp"

#include <algorithm>
#include <string>

#include "cssplc/errors.hpp"

namespace cssplc {

std::vector<double> superbin_energies(std::size_t superbin_size, std::span<const Complex> y) {
    if (superbin_size == 0 || y.size() % superbin_size != 0) {
        throw ConfigError("superbin size " + std::to_string(superbin_size) + " does not divide " +
                          std::to_string(y.size()) + " bins");
    }
    std::vector<double> s(y.size() / superbin_size, 0.0);
    for (std::size_t g = 0; g < s.size(); ++g) {
        double acc = 0.0;
        for (std::size_t n = g * superbin_size; n < (g + 1) * superbin_size; ++n) acc += std::norm(y[n]);
        s[g] = acc;
    }
    return s;
}

std::vector<double> superbin_energies(const CssParams& params, std::span<const Complex> y) {
    if (y.size() != params.chips()) {
        throw FramingError("spectrum has " + std::to_string(y.size()) + " bins, expected " +
                           std::to_string(params.chips()));
    }
    return superbin_energies(params.superbin_size, y);
}

namespace {

std::uint32_t argmax(std::span<const double> v) {
    if (v.empty()) throw ParameterError("cannot decide on an empty energy vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return static_cast<std::uint32_t>(best);
}

} // namespace

std::uint32_t decide_mod(std::span<const double> s) { return argmax(s); }
std::uint32_t decide_enhanced(std::span<const double> h) { return argmax(h); }

RunningMeanState::RunningMeanState(std::size_t superbins, std::size_t depth)
    : superbins_(superbins), depth_(depth), ring_(superbins * depth, 0.0), sums_(superbins, 0.0) {
    if (superbins == 0) throw ConfigError("running mean needs at least one superbin");
    if (depth == 0) throw ConfigError("running mean depth must be at least 1");
}

void RunningMeanState::update(std::span<const double> s, std::span<double> h) {
    if (s.size() != superbins_ || h.size() != superbins_) {
        throw FramingError("running mean expects " + std::to_string(superbins_) + " superbins, got " +
                           std::to_string(s.size()));
    }
    double* row = ring_.data() + next_ * superbins_;
    for (std::size_t g = 0; g < superbins_; ++g) {
        sums_[g] += s[g] - row[g];
        row[g] = s[g];
    }
    ++seen_;
    if (++next_ == depth_) {
        next_ = 0;
        rebuild_sums();
    }
    const auto fill = static_cast<double>(window_fill());
    for (std::size_t g = 0; g < superbins_; ++g) h[g] = sums_[g] / fill;
}

std::vector<double> RunningMeanState::update(std::span<const double> s) {
    std::vector<double> h(superbins_);
    update(s, h);
    return h;
}

void RunningMeanState::reset() {
    std::fill(ring_.begin(), ring_.end(), 0.0);
    std::fill(sums_.begin(), sums_.end(), 0.0);
    next_ = 0;
    seen_ = 0;
}

void RunningMeanState::rebuild_sums() {
    std::fill(sums_.begin(), sums_.end(), 0.0);
    for (std::size_t r = 0; r < depth_; ++r) {
        const double* row = ring_.data() + r * superbins_;
        for (std::size_t g = 0; g < superbins_; ++g) sums_[g] += row[g];
    }
}

std::vector<double> RunningMeanState::recomputed_mean() const {
    std::vector<double> mean(superbins_, 0.0);
    const std::size_t fill = window_fill();
    if (fill == 0) return mean;
    // Unfilled rows are still zero, so summing every row is exact.
    for (std::size_t r = 0; r < depth_; ++r) {
        const double* row = ring_.data() + r * superbins_;
        for (std::size_t g = 0; g < superbins_; ++g) mean[g] += row[g];
    }
    for (auto& v : mean) v /= static_cast<double>(fill);
    return mean;
}

std::vector<double> update_enhanced(RunningMeanState& state, std::span<const double> s) { return state.update(s); }

DemodFrame demodulate_symbol(const CssParams& params, const ComplexSignal& r, RunningMeanState& state) {
    params.validate();
    if (state.superbins() != params.superbin_count() || state.depth() != params.averaging_depth) {
        throw ConfigError("running-mean state does not match the parameters (G = " +
                          std::to_string(params.superbin_count()) + ", Q = " + std::to_string(params.averaging_depth) +
                          ")");
    }
    DemodFrame f;
    f.y = demodulate_fft(params, r);
    f.s = superbin_energies(params, f.y);
    f.frame_index = state.frames_seen();
    f.h = state.update(f.s);
    f.decision_mod = decide_mod(f.s);
    f.decision_enhanced = decide_enhanced(f.h);
    return f;
}

Demodulator::Demodulator(const CssParams& params)
    : front_(params), state_(params.superbin_count(), params.averaging_depth), scratch_(params.chips()) {}

DemodFrame Demodulator::process(std::span<const Complex> r) {
    DemodFrame f;
    process_into(r, f);
    return f;
}

void Demodulator::process_into(std::span<const Complex> r, DemodFrame& frame) {
    frame.y.resize(front_.chips());
    front_.spectrum(r, scratch_, frame.y);
    const std::size_t p = front_.params().superbin_size;
    const std::size_t g_count = front_.chips() / p;
    frame.s.resize(g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        double acc = 0.0;
        for (std::size_t n = g * p; n < (g + 1) * p; ++n) acc += std::norm(frame.y[n]);
        frame.s[g] = acc;
    }
    frame.h.resize(g_count);
    state_.update(frame.s, frame.h);
    frame.decision_mod = decide_mod(frame.s);
    frame.decision_enhanced = decide_enhanced(frame.h);
    frame.frame_index = frames_++;
}

void Demodulator::reset() {
    state_.reset();
    frames_ = 0;
}

} // namespace cssplc
