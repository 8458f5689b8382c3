#include "cssplc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "cssplc/chirp.hpp"
#include "cssplc/demod.hpp"
#include "cssplc/errors.hpp"

namespace cssplc {

const char* to_string(DemodMode mode) noexcept {
    switch (mode) {
    case DemodMode::mod: return "mod";
    case DemodMode::enhanced: return "enhanced";
    case DemodMode::both: return "both";
    }
    return "?";
}

const char* to_string(ChannelRegeneration regen) noexcept {
    return regen == ChannelRegeneration::fixed ? "fixed" : "per-trial";
}

DemodMode parse_demod_mode(const std::string& text) {
    if (text == "mod") return DemodMode::mod;
    if (text == "enhanced") return DemodMode::enhanced;
    if (text == "both") return DemodMode::both;
    throw ConfigError("unknown mode '" + text + "' (expected mod, enhanced or both)");
}

ChannelRegeneration parse_channel_regeneration(const std::string& text) {
    if (text == "per-trial") return ChannelRegeneration::per_trial;
    if (text == "fixed") return ChannelRegeneration::fixed;
    throw ConfigError("unknown channel regeneration '" + text + "' (expected per-trial or fixed)");
}

void ChannelSpec::validate() const {
    switch (kind) {
    case Kind::identity: break;
    case Kind::preset: (void)preset_channel(preset); break;
    case Kind::rayleigh:
        if (!(rms_samples > 0.0) || !std::isfinite(rms_samples)) {
            throw ConfigError("Rayleigh channel needs a positive rms_samples");
        }
        break;
    case Kind::file:
        if (path.empty()) throw ConfigError("file channel needs a path");
        break;
    }
}

std::string ChannelSpec::describe() const {
    char buf[96];
    switch (kind) {
    case Kind::identity: return "identity";
    case Kind::preset: return preset;
    case Kind::rayleigh:
        std::snprintf(buf, sizeof buf, "rayleigh(rms=%g;taps=%zu)", rms_samples,
                      num_taps ? num_taps : default_rayleigh_taps(rms_samples));
        return buf;
    case Kind::file: return "file(" + path + ")";
    }
    return "?";
}

ImpulseResponse ChannelSpec::realize(std::uint64_t seed) const {
    switch (kind) {
    case Kind::identity: return identity_channel();
    case Kind::preset: return preset_channel(preset);
    case Kind::rayleigh:
        return rayleigh_channel(rms_samples, num_taps ? num_taps : default_rayleigh_taps(rms_samples), seed);
    case Kind::file: return load_impulse_response(path);
    }
    return identity_channel();
}

std::vector<std::size_t> ExperimentConfig::effective_superbin_sizes() const {
    return superbin_sizes.empty() ? std::vector<std::size_t>{params.superbin_size} : superbin_sizes;
}

std::vector<std::size_t> ExperimentConfig::effective_averaging_depths() const {
    return averaging_depths.empty() ? std::vector<std::size_t>{params.averaging_depth} : averaging_depths;
}

void ExperimentConfig::validate() const {
    params.validate();
    for (std::size_t p : effective_superbin_sizes()) {
        CssParams probe = params;
        probe.superbin_size = p;
        probe.validate();
    }
    for (std::size_t q : effective_averaging_depths()) {
        if (q < 1) throw ConfigError("averaging depths must be at least 1");
    }
    channel.validate();
    if (snr_grid_db.empty()) throw ConfigError("SNR grid is empty");
    for (double s : snr_grid_db) {
        if (std::isnan(s) || (std::isinf(s) && s < 0)) throw ConfigError("SNR grid values must be numbers or +inf");
    }
    if (trials < 1) throw ConfigError("trials must be at least 1");
    const auto mag = static_cast<std::size_t>(std::abs(static_cast<long>(timing_offset)));
    if (mag >= params.chips()) {
        throw ConfigError("timing offset " + std::to_string(timing_offset) + " must be smaller than 2^sf");
    }
    for (std::size_t q : capture_depths) {
        if (q < 1) throw ConfigError("capture depths must be at least 1");
    }
    for (std::size_t p : effective_superbin_sizes()) {
        if (capture_symbol >= params.chips() / p) {
            throw ConfigError("capture symbol " + std::to_string(capture_symbol) + " outside [0, G) for P = " +
                              std::to_string(p));
        }
    }
    if (channel.kind == ChannelSpec::Kind::file) (void)channel.realize(0);
}

bool SerResult::same_outcome(const SerResult& o) const {
    return snr_db == o.snr_db && sf == o.sf && superbin_size == o.superbin_size &&
           averaging_depth == o.averaging_depth && mode == o.mode && channel == o.channel && errors == o.errors &&
           trials == o.trials;
}

std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    // Clamp so lo <= ser <= hi survives rounding at the extremes.
    return {std::clamp(std::min(centre - half, p), 0.0, 1.0), std::clamp(std::max(centre + half, p), 0.0, 1.0)};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kFixedChannelStream = 0xC4A77E1ULL;

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

// Runs body(worker, index) for index in [0, n). Work is handed out by an atomic
// counter; callers reduce per-worker tallies, so the result is order-free.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](unsigned worker) {
        try {
            for (std::size_t i = next++; i < n; i = next++) body(worker, i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

// Impulse responses for a run: one fixed response, or fresh Rayleigh draws
// from a profile computed once.
class ChannelSource {
public:
    ChannelSource(const ExperimentConfig& config, std::size_t chips) : chips_(chips) {
        if (config.channel.randomized() && config.regeneration == ChannelRegeneration::per_trial) {
            const auto& ch = config.channel;
            profile_ = exponential_profile(ch.rms_samples, ch.num_taps ? ch.num_taps : default_rayleigh_taps(ch.rms_samples));
            if (profile_.size() > chips_) throw ConfigError("channel is longer than one symbol");
        } else {
            fixed_ = config.channel.realize(derive_seed(config.master_seed, kFixedChannelStream, 0));
            if (fixed_->max_delay() >= chips_) throw ConfigError("channel is longer than one symbol");
        }
    }

    ImpulseResponse draw(std::uint64_t seed) const { return fixed_ ? *fixed_ : rayleigh_channel(profile_, seed); }

private:
    std::size_t chips_;
    std::optional<ImpulseResponse> fixed_;
    std::vector<double> profile_;
};

// One symbol stream through the channel, framed and corrupted by noise.
class LinkSimulator {
public:
    LinkSimulator(const CssParams& params, int timing_offset)
        : params_(params), m_(params.chips()), offset_(timing_offset), frame_(m_) {}

    // Sends `lead`, then `symbol` repeated `frames` times, then `tail`, and
    // hands each of the `frames` receive windows to on_frame(span).
    //
    // Away from both ends the channel output is the same for every repeat, so
    // long runs are simulated as lead, symbol x3, tail with the middle window
    // reused. The reused samples are computed by exactly the same operations,
    // so this only saves time.
    template <class OnFrame>
    void run(const ImpulseResponse& h, std::uint32_t lead, std::uint32_t symbol, std::uint32_t tail,
             std::size_t frames, double noise_var, std::mt19937_64& rng, OnFrame&& on_frame) {
        const bool fold = frames > 3 && offset_ >= 0 &&
                          static_cast<std::size_t>(offset_) + h.max_delay() <= m_;
        const std::size_t sent = fold ? 3 : frames;
        const std::size_t total = (sent + 2) * m_;
        tx_.resize(total);
        rx_.resize(total);
        const ComplexSignal lead_w = modulate_superbin(params_, lead);
        const ComplexSignal sym_w = modulate_superbin(params_, symbol);
        const ComplexSignal tail_w = modulate_superbin(params_, tail);
        std::copy(lead_w.samples.begin(), lead_w.samples.end(), tx_.begin());
        for (std::size_t f = 0; f < sent; ++f) {
            std::copy(sym_w.samples.begin(), sym_w.samples.end(), tx_.begin() + static_cast<std::ptrdiff_t>((f + 1) * m_));
        }
        std::copy(tail_w.samples.begin(), tail_w.samples.end(), tx_.end() - static_cast<std::ptrdiff_t>(m_));

        MultipathStream stream(h);
        stream.process(tx_, rx_);

        for (std::size_t f = 0; f < frames; ++f) {
            std::size_t slot = f;
            if (fold) slot = f == 0 ? 0 : (f + 1 == frames ? 2 : 1);
            const auto start = static_cast<std::ptrdiff_t>((slot + 1) * m_) - offset_;
            std::copy(rx_.begin() + start, rx_.begin() + start + static_cast<std::ptrdiff_t>(m_), frame_.begin());
            add_awgn(frame_, noise_var, rng);
            on_frame(std::span<const Complex>(frame_));
        }
    }

private:
    CssParams params_;
    std::size_t m_;
    std::ptrdiff_t offset_;
    std::vector<Complex> tx_, rx_, frame_;
};

double link_noise_variance(const CssParams& params, double snr_db) {
    return noise_variance(params.symbol_energy / static_cast<double>(params.chips()), snr_db);
}

struct Tally {
    std::uint64_t mod_errors = 0;
    std::uint64_t mod_decisions = 0;
    std::uint64_t enhanced_errors = 0;
    std::uint64_t enhanced_decisions = 0;
};

SerResult make_result(const ExperimentConfig& cfg, double snr, std::size_t p, std::size_t q, const char* mode,
                      std::uint64_t errors, std::uint64_t trials, double wall) {
    SerResult r;
    r.snr_db = snr;
    r.sf = cfg.params.sf;
    r.superbin_size = p;
    r.averaging_depth = q;
    r.mode = mode;
    r.channel = cfg.channel.describe();
    r.errors = errors;
    r.trials = trials;
    r.ser = trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0;
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(errors, trials);
    r.wall_time_s = wall;
    return r;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

std::vector<SerResult> run_ser_sweep(const ExperimentConfig& config) {
    config.validate();
    const ChannelSource channels(config, config.params.chips());

    std::vector<std::size_t> depths = config.effective_averaging_depths();
    if (config.mode == DemodMode::mod) depths = {1};

    std::vector<SerResult> results;
    for (std::size_t p : config.effective_superbin_sizes()) {
        for (std::size_t qi = 0; qi < depths.size(); ++qi) {
            const std::size_t q = depths[qi];
            CssParams params = config.params;
            params.superbin_size = p;
            params.averaging_depth = q;
            const std::size_t frames = config.mode == DemodMode::mod ? 1 : q;
            const auto g_count = static_cast<std::uint32_t>(params.superbin_count());

            for (std::size_t si = 0; si < config.snr_grid_db.size(); ++si) {
                const double snr = config.snr_grid_db[si];
                const double noise_var = link_noise_variance(params, snr);
                const unsigned workers = worker_count(config.workers, config.trials);
                std::vector<Tally> tallies(workers);
                std::vector<std::optional<Demodulator>> demods(workers);
                std::vector<std::optional<LinkSimulator>> links(workers);
                const auto t0 = std::chrono::steady_clock::now();

                parallel_for(config.trials, workers, [&](unsigned w, std::size_t trial) {
                    if (!demods[w]) {
                        demods[w].emplace(params);
                        links[w].emplace(params, config.timing_offset);
                    }
                    std::mt19937_64 rng(derive_seed(config.master_seed, si, trial));
                    const auto symbol = static_cast<std::uint32_t>(rng() % g_count);
                    const auto lead = static_cast<std::uint32_t>(rng() % g_count);
                    const auto tail = static_cast<std::uint32_t>(rng() % g_count);
                    const std::uint64_t channel_seed = rng();
                    const ImpulseResponse h = channels.draw(channel_seed);

                    Demodulator& demod = *demods[w];
                    demod.reset();
                    DemodFrame frame;
                    Tally& t = tallies[w];
                    links[w]->run(h, lead, symbol, tail, frames, noise_var, rng, [&](std::span<const Complex> r) {
                        demod.process_into(r, frame);
                        ++t.mod_decisions;
                        if (frame.decision_mod != symbol) ++t.mod_errors;
                    });
                    ++t.enhanced_decisions;
                    if (frame.decision_enhanced != symbol) ++t.enhanced_errors;
                });

                Tally sum;
                for (const auto& t : tallies) {
                    sum.mod_errors += t.mod_errors;
                    sum.mod_decisions += t.mod_decisions;
                    sum.enhanced_errors += t.enhanced_errors;
                    sum.enhanced_decisions += t.enhanced_decisions;
                }
                const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                switch (config.mode) {
                case DemodMode::mod:
                    results.push_back(make_result(config, snr, p, 1, "mod", sum.mod_errors, sum.mod_decisions, wall));
                    break;
                case DemodMode::enhanced:
                    results.push_back(make_result(config, snr, p, q, "enhanced", sum.enhanced_errors,
                                                  sum.enhanced_decisions, wall));
                    break;
                case DemodMode::both:
                    if (qi == 0) {
                        results.push_back(
                            make_result(config, snr, p, 1, "mod", sum.mod_errors, sum.mod_decisions, wall));
                    }
                    results.push_back(make_result(config, snr, p, q, "enhanced", sum.enhanced_errors,
                                                  sum.enhanced_decisions, wall));
                    break;
                }
            }
        }
    }
    return results;
}

std::vector<DistributionCapture> run_distribution_capture(const ExperimentConfig& config) {
    config.validate();
    CssParams params = config.params;
    params.superbin_size = config.effective_superbin_sizes().front();
    params.averaging_depth = 1;
    const std::size_t g_count = params.superbin_count();
    if (g_count < 2) throw ConfigError("distribution capture needs at least two superbins");

    std::size_t window = 1;
    for (std::size_t q : config.capture_depths) window = std::max(window, q);
    const std::size_t windows = (config.trials + window - 1) / window;

    const ChannelSource channels(config, params.chips());

    std::vector<DistributionCapture> out;
    for (std::size_t si = 0; si < config.snr_grid_db.size(); ++si) {
        const double snr = config.snr_grid_db[si];
        const double noise_var = link_noise_variance(params, snr);
        const std::uint32_t symbol = config.capture_symbol;

        // Per-window storage so the merge order is independent of scheduling.
        struct WindowData {
            std::vector<double> signal, noise, max_noise;
            std::vector<DistributionCapture::Averaged> averaged;
        };
        std::vector<WindowData> data(windows);
        const unsigned workers = worker_count(config.workers, windows);
        std::vector<std::optional<Demodulator>> demods(workers);
        std::vector<std::optional<LinkSimulator>> links(workers);

        parallel_for(windows, workers, [&](unsigned w, std::size_t wi) {
            if (!demods[w]) {
                demods[w].emplace(params);
                links[w].emplace(params, config.timing_offset);
            }
            std::mt19937_64 rng(derive_seed(config.master_seed, si, wi));
            const std::uint64_t channel_seed = rng();
            const ImpulseResponse h = channels.draw(channel_seed);

            WindowData& d = data[wi];
            std::vector<RunningMeanState> states;
            for (std::size_t q : config.capture_depths) {
                states.emplace_back(g_count, q);
                d.averaged.push_back({q, {}, {}, {}});
            }
            Demodulator& demod = *demods[w];
            demod.reset();
            DemodFrame frame;
            std::vector<double> h_buf(g_count);
            auto record = [&](std::span<const double> e, std::vector<double>& sig, std::vector<double>& noise,
                              std::vector<double>& mx) {
                double best = -1.0;
                for (std::size_t g = 0; g < e.size(); ++g) {
                    if (g == symbol) continue;
                    noise.push_back(e[g]);
                    best = std::max(best, e[g]);
                }
                sig.push_back(e[symbol]);
                mx.push_back(best);
            };
            links[w]->run(h, symbol, symbol, symbol, window, noise_var, rng, [&](std::span<const Complex> r) {
                demod.process_into(r, frame);
                record(frame.s, d.signal, d.noise, d.max_noise);
                for (std::size_t k = 0; k < states.size(); ++k) {
                    states[k].update(frame.s, h_buf);
                    if (states[k].frames_seen() == states[k].depth()) {
                        auto& a = d.averaged[k];
                        record(h_buf, a.signal, a.noise, a.max_noise);
                        states[k].reset();
                    }
                }
            });
        });

        DistributionCapture cap;
        cap.snr_db = snr;
        cap.symbol = symbol;
        for (std::size_t q : config.capture_depths) cap.averaged.push_back({q, {}, {}, {}});
        for (const auto& d : data) {
            cap.signal.insert(cap.signal.end(), d.signal.begin(), d.signal.end());
            cap.noise.insert(cap.noise.end(), d.noise.begin(), d.noise.end());
            cap.max_noise.insert(cap.max_noise.end(), d.max_noise.begin(), d.max_noise.end());
            for (std::size_t k = 0; k < d.averaged.size(); ++k) {
                auto& a = cap.averaged[k];
                const auto& src = d.averaged[k];
                a.signal.insert(a.signal.end(), src.signal.begin(), src.signal.end());
                a.noise.insert(a.noise.end(), src.noise.begin(), src.noise.end());
                a.max_noise.insert(a.max_noise.end(), src.max_noise.begin(), src.max_noise.end());
            }
        }
        double ref = 0.0;
        for (double v : cap.noise) ref += v;
        ref /= static_cast<double>(cap.noise.size());
        if (!(ref > 0.0)) ref = 1.0;  // noiseless capture: keep raw energies
        cap.noise_reference = ref;
        auto scale = [ref](std::vector<double>& v) {
            for (auto& x : v) x /= ref;
        };
        scale(cap.signal);
        scale(cap.noise);
        scale(cap.max_noise);
        for (auto& a : cap.averaged) {
            scale(a.signal);
            scale(a.noise);
            scale(a.max_noise);
        }
        out.push_back(std::move(cap));
    }
    return out;
}

std::vector<AirtimeRow> airtime_table(const std::vector<int>& sf_list, double bandwidth_hz,
                                      const std::vector<std::size_t>& q_list) {
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
        throw ParameterError("bandwidth must be positive");
    }
    std::vector<AirtimeRow> rows;
    for (int sf : sf_list) {
        if (sf < kMinSpreadingFactor || sf > kMaxSpreadingFactor) {
            throw ParameterError("spreading factor " + std::to_string(sf) + " outside [7, 14]");
        }
        for (std::size_t q : q_list) {
            if (q < 1) throw ParameterError("Q must be at least 1");
            const double chips = std::ldexp(1.0, sf);
            rows.push_back({sf, bandwidth_hz, q, static_cast<double>(q) * chips / bandwidth_hz});
        }
    }
    return rows;
}

} // namespace cssplc
