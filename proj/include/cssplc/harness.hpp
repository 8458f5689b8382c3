#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cssplc/channel.hpp"
#include "cssplc/params.hpp"

namespace cssplc {

enum class DemodMode { mod, enhanced, both };
enum class ChannelRegeneration { per_trial, fixed };

const char* to_string(DemodMode mode) noexcept;
const char* to_string(ChannelRegeneration regen) noexcept;
DemodMode parse_demod_mode(const std::string& text);
ChannelRegeneration parse_channel_regeneration(const std::string& text);

/// Where a trial's impulse response comes from.
struct ChannelSpec {
    enum class Kind { identity, preset, rayleigh, file };

    Kind kind = Kind::identity;
    std::string preset;             // Kind::preset
    double rms_samples = 0.0;       // Kind::rayleigh
    std::size_t num_taps = 0;       // Kind::rayleigh; 0 selects default_rayleigh_taps()
    std::string path;               // Kind::file

    static ChannelSpec identity() { return {}; }
    static ChannelSpec named(std::string name) { return {Kind::preset, std::move(name), 0.0, 0, {}}; }
    static ChannelSpec rayleigh(double rms, std::size_t taps = 0) { return {Kind::rayleigh, {}, rms, taps, {}}; }
    static ChannelSpec file(std::string p) { return {Kind::file, {}, 0.0, 0, std::move(p)}; }

    void validate() const;
    /// Short comma-free label, e.g. "rayleigh(rms=20;taps=101)".
    std::string describe() const;
    /// Impulse response for one realization. Identity, presets and files ignore the seed.
    ImpulseResponse realize(std::uint64_t seed) const;
    bool randomized() const noexcept { return kind == Kind::rayleigh; }
};

struct ExperimentConfig {
    CssParams params;
    std::vector<std::size_t> superbin_sizes;    // empty: {params.superbin_size}
    std::vector<std::size_t> averaging_depths;  // empty: {params.averaging_depth}
    ChannelSpec channel;
    ChannelRegeneration regeneration = ChannelRegeneration::per_trial;
    std::vector<double> snr_grid_db;
    std::size_t trials = 1000;
    std::uint64_t master_seed = 1;
    DemodMode mode = DemodMode::mod;
    int timing_offset = 0;
    /// Worker threads; 0 uses the hardware concurrency. Never affects results.
    unsigned workers = 0;

    /// Distribution capture: transmitted superbin symbol and running-mean depths.
    std::uint32_t capture_symbol = 0;
    std::vector<std::size_t> capture_depths;

    std::vector<std::size_t> effective_superbin_sizes() const;
    std::vector<std::size_t> effective_averaging_depths() const;

    /// Throws ConfigError / ParameterError before any trial runs.
    void validate() const;
};

struct SerResult {
    double snr_db = 0.0;
    int sf = 0;
    std::size_t superbin_size = 1;
    std::size_t averaging_depth = 1;
    std::string mode;     // "mod" or "enhanced"
    std::string channel;  // ChannelSpec::describe()
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;
    double ser = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double wall_time_s = 0.0;  // reported on the console, never written to result files

    bool same_outcome(const SerResult& o) const;
};

/// Wilson score interval at 95 % for `errors` out of `trials`.
std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials);

/// Counter-based seed for (master, a, b); independent of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept;

/// Symbol error rate over the grid SNR x P x Q.
///
/// Each trial draws a superbin symbol, a preceding symbol (whose echoes leak
/// into the first frame) and, for randomized channels in per-trial mode, a new
/// impulse response. The stream is sent through a persistent tap-delay line,
/// framed with the configured timing offset and corrupted by AWGN at
/// snr = (Es / 2^sf) / noise variance. Mod mode decides on a single frame;
/// enhanced mode sends the symbol Q times and decides once on the running
/// mean; both mode runs enhanced windows and also scores every frame's mod
/// decision. Trials at the same SNR share seeds across P and Q.
std::vector<SerResult> run_ser_sweep(const ExperimentConfig& config);

/// Energy samples for a repeatedly transmitted known symbol.
struct DistributionCapture {
    struct Averaged {
        std::size_t q = 1;
        std::vector<double> signal;
        std::vector<double> noise;
        std::vector<double> max_noise;
    };

    double snr_db = 0.0;
    std::uint32_t symbol = 0;
    double noise_reference = 1.0;   // mean noise-superbin energy used to normalize
    std::vector<double> signal;     // transmitted superbin, one per frame
    std::vector<double> noise;      // every other superbin, G - 1 per frame
    std::vector<double> max_noise;  // largest noise superbin per frame
    std::vector<Averaged> averaged; // running means at each capture depth, one per full window
};

/// One capture per SNR grid point (the first superbin size is used). The known
/// symbol is sent continuously; the channel is redrawn every window of
/// max(capture_depths) frames in per-trial mode. All values are divided by the
/// mean noise-superbin energy of that capture.
std::vector<DistributionCapture> run_distribution_capture(const ExperimentConfig& config);

struct AirtimeRow {
    int sf = 0;
    double bandwidth_hz = 0.0;
    std::size_t q = 1;
    double time_on_air_s = 0.0;  // q * 2^sf / bandwidth
};

/// Throws ParameterError for a non-positive bandwidth, SF outside [7, 14] or Q = 0.
std::vector<AirtimeRow> airtime_table(const std::vector<int>& sf_list, double bandwidth_hz,
                                      const std::vector<std::size_t>& q_list);

} // namespace cssplc
