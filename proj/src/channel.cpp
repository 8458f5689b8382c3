#include "cssplc/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cssplc/errors.hpp"

namespace cssplc {

ImpulseResponse ImpulseResponse::from_taps(std::vector<Tap> taps) {
    if (taps.empty()) throw ConfigError("impulse response needs at least one tap");
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto& g = taps[i].gain;
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
            throw ConfigError("tap " + std::to_string(i) + " has a non-finite gain");
        }
        if (i > 0 && taps[i].delay <= taps[i - 1].delay) {
            throw ConfigError("tap delays must be strictly increasing (tap " + std::to_string(i) + ")");
        }
    }
    double e = 0.0;
    for (const auto& t : taps) e += std::norm(t.gain);
    if (!(e > 0.0)) throw ConfigError("impulse response has zero energy");
    const double scale = 1.0 / std::sqrt(e);
    for (auto& t : taps) t.gain *= scale;
    return ImpulseResponse(std::move(taps));
}

double ImpulseResponse::energy() const noexcept {
    double e = 0.0;
    for (const auto& t : taps_) e += std::norm(t.gain);
    return e;
}

ImpulseResponse identity_channel() { return ImpulseResponse::from_taps({Tap{0, {1.0, 0.0}}}); }

ImpulseResponse four_tap_channel() {
    return ImpulseResponse::from_taps({Tap{0, {1.0, 0.0}}, Tap{4, {1.0, 0.0}}, Tap{8, {1.0, 0.0}}, Tap{12, {1.0, 0.0}}});
}

ImpulseResponse preset_channel(const std::string& name) {
    if (name == "identity") return identity_channel();
    if (name == "four-tap") return four_tap_channel();
    throw ConfigError("unknown channel preset '" + name + "' (expected identity or four-tap)");
}

double rms_delay_spread(const ImpulseResponse& h) {
    double total = 0.0, mean = 0.0;
    for (const auto& t : h.taps()) {
        const double p = std::norm(t.gain);
        total += p;
        mean += p * static_cast<double>(t.delay);
    }
    mean /= total;
    double second = 0.0;
    for (const auto& t : h.taps()) {
        const double d = static_cast<double>(t.delay) - mean;
        second += std::norm(t.gain) * d * d;
    }
    return std::sqrt(second / total);
}

std::size_t default_rayleigh_taps(double rms_delay_samples) {
    if (!(rms_delay_samples > 0.0)) throw ConfigError("RMS delay spread must be positive");
    return static_cast<std::size_t>(std::floor(5.0 * rms_delay_samples)) + 1;
}

namespace {

// Profile exp(-decay * d) over d = 0..n-1, unit sum.
std::vector<double> profile_with_decay(double decay, std::size_t n) {
    std::vector<double> p(n);
    double sum = 0.0;
    for (std::size_t d = 0; d < n; ++d) sum += (p[d] = std::exp(-decay * static_cast<double>(d)));
    for (auto& v : p) v /= sum;
    return p;
}

double profile_rms(const std::vector<double>& p) {
    double mean = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) mean += p[d] * static_cast<double>(d);
    double var = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) {
        const double x = static_cast<double>(d) - mean;
        var += p[d] * x * x;
    }
    return std::sqrt(var);
}

} // namespace

std::vector<double> exponential_profile(double rms_delay_samples, std::size_t num_taps) {
    if (!(rms_delay_samples > 0.0) || !std::isfinite(rms_delay_samples)) {
        throw ConfigError("RMS delay spread must be positive and finite");
    }
    if (num_taps < 1) throw ConfigError("Rayleigh channel needs at least one tap");
    if (num_taps == 1) return {1.0};

    // RMS spread falls monotonically as the decay rate grows; a flat profile is
    // the widest one this many taps can express.
    if (profile_rms(profile_with_decay(0.0, num_taps)) <= rms_delay_samples) {
        return profile_with_decay(0.0, num_taps);
    }
    double lo = 0.0, hi = 1.0;
    while (profile_rms(profile_with_decay(hi, num_taps)) > rms_delay_samples) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (profile_rms(profile_with_decay(mid, num_taps)) > rms_delay_samples) lo = mid;
        else hi = mid;
    }
    return profile_with_decay(0.5 * (lo + hi), num_taps);
}

ImpulseResponse rayleigh_channel(double rms_delay_samples, std::size_t num_taps, std::uint64_t seed) {
    return rayleigh_channel(exponential_profile(rms_delay_samples, num_taps), seed);
}

ImpulseResponse rayleigh_channel(std::span<const double> pdp, std::uint64_t seed) {
    if (pdp.empty()) throw ConfigError("Rayleigh channel needs at least one tap");
    const std::size_t num_taps = pdp.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Tap> taps(num_taps);
    for (std::size_t d = 0; d < num_taps; ++d) {
        const double s = std::sqrt(pdp[d] / 2.0);
        const double re = normal(rng);
        const double im = normal(rng);
        taps[d] = Tap{d, {s * re, s * im}};
    }
    return ImpulseResponse::from_taps(std::move(taps));
}

ComplexSignal apply_multipath(const ComplexSignal& signal, const ImpulseResponse& h) {
    if (h.max_delay() >= signal.size()) {
        throw ConfigError("tap delay " + std::to_string(h.max_delay()) + " not shorter than the signal (" +
                          std::to_string(signal.size()) + " samples)");
    }
    ComplexSignal out{std::vector<Complex>(signal.size()), signal.sample_rate_hz};
    for (const auto& t : h.taps()) {
        for (std::size_t n = t.delay; n < signal.size(); ++n) out.samples[n] += t.gain * signal.samples[n - t.delay];
    }
    return out;
}

MultipathStream::MultipathStream(ImpulseResponse h) : h_(std::move(h)), history_(h_.max_delay()) {}

void MultipathStream::process(std::span<const Complex> in, std::span<Complex> out) {
    if (out.size() != in.size()) throw FramingError("multipath stream input/output size mismatch");
    const std::size_t hist = history_.size();
    // work_ = history followed by the new block, so sample n of the block sits at hist + n.
    work_.resize(hist + in.size());
    std::copy(history_.begin(), history_.end(), work_.begin());
    std::copy(in.begin(), in.end(), work_.begin() + static_cast<std::ptrdiff_t>(hist));

    std::fill(out.begin(), out.end(), Complex{});
    // Spelled out on interleaved doubles: std::complex operator* goes through
    // the NaN-recovering __muldc3 and does not vectorize.
    auto* acc = reinterpret_cast<double*>(out.data());
    for (const auto& t : h_.taps()) {
        const auto* src = reinterpret_cast<const double*>(work_.data() + (hist - t.delay));
        const double gr = t.gain.real(), gi = t.gain.imag();
        for (std::size_t n = 0; n < in.size(); ++n) {
            const double xr = src[2 * n], xi = src[2 * n + 1];
            acc[2 * n] += gr * xr - gi * xi;
            acc[2 * n + 1] += gr * xi + gi * xr;
        }
    }
    std::copy(work_.end() - static_cast<std::ptrdiff_t>(hist), work_.end(), history_.begin());
}

void MultipathStream::reset() { std::fill(history_.begin(), history_.end(), Complex{}); }

double noise_variance(double signal_power, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    if (std::isnan(snr_db)) throw ConfigError("SNR is NaN");
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

void add_awgn(std::span<Complex> x, double variance, std::mt19937_64& rng) {
    if (variance <= 0.0) return;
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (auto& v : x) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += Complex{re, im};
    }
}

ComplexSignal apply_awgn(const ComplexSignal& signal, const NoiseSpec& spec) {
    if (signal.empty()) throw ParameterError("cannot add noise to an empty signal");
    ComplexSignal out = signal;
    std::mt19937_64 rng(spec.seed);
    add_awgn(out.samples, noise_variance(signal.mean_power(), spec.snr_db), rng);
    return out;
}

ComplexSignal apply_timing_offset(const CssParams& params, const ComplexSignal& signal, int offset_samples) {
    params.validate();
    const auto magnitude = static_cast<std::size_t>(offset_samples < 0 ? -static_cast<long>(offset_samples)
                                                                        : static_cast<long>(offset_samples));
    if (magnitude >= params.chips()) {
        throw ConfigError("timing offset " + std::to_string(offset_samples) + " must be smaller than 2^sf = " +
                          std::to_string(params.chips()));
    }
    ComplexSignal out{std::vector<Complex>(signal.size()), signal.sample_rate_hz};
    const std::size_t n = signal.size();
    if (magnitude >= n) return out;
    if (offset_samples >= 0) {
        std::copy(signal.samples.begin(), signal.samples.end() - static_cast<std::ptrdiff_t>(magnitude),
                  out.samples.begin() + static_cast<std::ptrdiff_t>(magnitude));
    } else {
        std::copy(signal.samples.begin() + static_cast<std::ptrdiff_t>(magnitude), signal.samples.end(),
                  out.samples.begin());
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double_field(const std::string& field, const std::string& source, std::size_t line, const char* what) {
    double v = 0.0;
    const char* b = field.data();
    const char* e = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e || !std::isfinite(v)) {
        throw ParseError(source, line, std::string("invalid ") + what + " '" + field + "'");
    }
    return v;
}

} // namespace

ImpulseResponse parse_impulse_response(std::istream& in, const std::string& source_name) {
    std::vector<Tap> taps;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (fields.size() != 3) {
            throw ParseError(source_name, line_no,
                             "expected 'delay_samples,real_gain,imag_gain', got " + std::to_string(fields.size()) +
                                 " fields");
        }
        std::size_t delay = 0;
        {
            const char* b = fields[0].data();
            const char* e = b + fields[0].size();
            auto [ptr, ec] = std::from_chars(b, e, delay);
            if (ec != std::errc{} || ptr != e) {
                throw ParseError(source_name, line_no, "invalid delay '" + fields[0] + "'");
            }
        }
        const double re = parse_double_field(fields[1], source_name, line_no, "real gain");
        const double im = parse_double_field(fields[2], source_name, line_no, "imaginary gain");
        if (!taps.empty() && delay <= taps.back().delay) {
            throw ParseError(source_name, line_no, "delay " + std::to_string(delay) +
                                                       " does not increase on the previous tap");
        }
        taps.push_back(Tap{delay, {re, im}});
    }
    if (taps.empty()) throw ParseError(source_name, 0, "no taps found");
    try {
        return ImpulseResponse::from_taps(std::move(taps));
    } catch (const ConfigError& e) {
        throw ParseError(source_name, 0, e.what());
    }
}

ImpulseResponse load_impulse_response(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open impulse response file " + path.string());
    return parse_impulse_response(in, path.string());
}

void write_impulse_response(std::ostream& out, const ImpulseResponse& h) {
    out << "# cssplc impulse response v1\n# delay_samples,real_gain,imag_gain\n";
    char buf[96];
    for (const auto& t : h.taps()) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t.delay, t.gain.real(), t.gain.imag());
        out << buf;
    }
}

} // namespace cssplc
