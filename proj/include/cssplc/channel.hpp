#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cssplc/params.hpp"
#include "cssplc/signal.hpp"

namespace cssplc {

struct Tap {
    std::size_t delay = 0;  // samples
    Complex gain{1.0, 0.0};

    bool operator==(const Tap&) const = default;
};

/// Tap-delay-line channel. Delays are strictly increasing and the taps carry
/// unit total energy.
class ImpulseResponse {
public:
    /// Validates and energy-normalizes. Throws ConfigError on an empty tap list,
    /// non-increasing delays, non-finite gains or zero total energy.
    static ImpulseResponse from_taps(std::vector<Tap> taps);

    const std::vector<Tap>& taps() const noexcept { return taps_; }
    std::size_t max_delay() const noexcept { return taps_.back().delay; }
    double energy() const noexcept;

    bool operator==(const ImpulseResponse&) const = default;

private:
    explicit ImpulseResponse(std::vector<Tap> taps) : taps_(std::move(taps)) {}
    std::vector<Tap> taps_;
};

/// Single unit tap at delay zero.
ImpulseResponse identity_channel();

/// Emulated line of the hardware test bench: four equal taps spaced 4 samples
/// apart (delays 0, 4, 8, 12).
ImpulseResponse four_tap_channel();

/// Built-in channel by name: "identity" or "four-tap". Throws ConfigError.
ImpulseResponse preset_channel(const std::string& name);

/// sqrt(sum p_i (d_i - mean_d)^2 / sum p_i) with p_i = |gain_i|^2, in samples.
double rms_delay_spread(const ImpulseResponse& h);

/// Tap count covering five time constants of an exponential profile, floor(5 * rms) + 1.
std::size_t default_rayleigh_taps(double rms_delay_samples);

/// Rayleigh channel: one tap per sample with independent complex Gaussian gains
/// following an exponential power-delay profile. The profile's decay is solved
/// so its RMS delay spread equals `rms_delay_samples` (or is as close as the
/// tap count allows); the realized taps are then energy-normalized.
ImpulseResponse rayleigh_channel(double rms_delay_samples, std::size_t num_taps, std::uint64_t seed);
/// Same draw for a precomputed power-delay profile (one tap per sample).
ImpulseResponse rayleigh_channel(std::span<const double> profile, std::uint64_t seed);

/// Power-delay profile used by rayleigh_channel, normalized to unit sum.
std::vector<double> exponential_profile(double rms_delay_samples, std::size_t num_taps);

/// Linear convolution truncated to the input length; the signal is assumed to
/// be preceded by silence. Throws ConfigError when a tap delay reaches the
/// signal length.
ComplexSignal apply_multipath(const ComplexSignal& signal, const ImpulseResponse& h);

/// Streaming tap-delay line whose state carries across calls, so echoes of one
/// symbol spill into the next. Single owner; not shareable while streaming.
class MultipathStream {
public:
    explicit MultipathStream(ImpulseResponse h);

    /// out[n] = sum_t gain_t * x[n - delay_t], with x before this call taken from history.
    void process(std::span<const Complex> in, std::span<Complex> out);
    void reset();
    const ImpulseResponse& response() const noexcept { return h_; }

private:
    ImpulseResponse h_;
    std::vector<Complex> history_;  // last max_delay input samples, oldest first
    std::vector<Complex> work_;
};

/// Noise level and seed. `snr_db` = +inf disables noise.
struct NoiseSpec {
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

/// Noise variance for a signal of mean power `signal_power` at `snr_db`
/// (per complex sample at the chip rate). 0 for +inf.
double noise_variance(double signal_power, double snr_db);

/// Adds circularly-symmetric complex Gaussian noise of total variance
/// `variance` (variance / 2 per real component).
void add_awgn(std::span<Complex> x, double variance, std::mt19937_64& rng);

/// AWGN at `spec.snr_db` relative to the mean power of `signal`. Deterministic in the seed.
ComplexSignal apply_awgn(const ComplexSignal& signal, const NoiseSpec& spec);

/// Receiver framing error. A positive offset opens the window `offset` samples
/// early, so the symbol appears delayed (like an extra path delay); a negative
/// offset opens it late. Exposed samples are zero. Requires |offset| < 2^sf.
ComplexSignal apply_timing_offset(const CssParams& params, const ComplexSignal& signal, int offset_samples);

/// Impulse-response CSV (format version 1): one tap per line
/// `delay_samples,real_gain,imag_gain`; blank lines and '#' comments ignored.
/// Result is validated and energy-normalized. Throws ParseError with the line.
ImpulseResponse parse_impulse_response(std::istream& in, const std::string& source_name);
ImpulseResponse load_impulse_response(const std::filesystem::path& path);
void write_impulse_response(std::ostream& out, const ImpulseResponse& h);

} // namespace cssplc
