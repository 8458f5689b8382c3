// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code is
// nonzero if any selected criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "cssplc/analysis.hpp"
#include "cssplc/channel.hpp"
#include "cssplc/chirp.hpp"
#include "cssplc/demod.hpp"
#include "cssplc/harness.hpp"
#include "cssplc/results_io.hpp"

using namespace cssplc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

CssParams make(int sf, std::size_t p = 1, std::size_t q = 1) {
    CssParams c;
    c.sf = sf;
    c.superbin_size = p;
    c.averaging_depth = q;
    return c;
}

// Welford accumulator.
struct Moments {
    double n = 0, mean = 0, m2 = 0;
    void add(double x) {
        n += 1;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / (n - 1); }
};

// 1. Every symbol at sf 7..12 round-trips through the noiseless identity link.
Outcome roundtrip() {
    constexpr double kMaxSeconds = 60.0;
    const auto t0 = Clock::now();
    std::uint64_t errors = 0, total = 0;
    for (int sf = 7; sf <= 12; ++sf) {
        const CssParams p = make(sf);
        Demodulator d(p);
        const ImpulseResponse h = identity_channel();
        for (std::uint32_t k = 0; k < p.chips(); ++k) {
            const auto r = apply_multipath(modulate(p, k), h);
            errors += d.process(r.samples).decision_mod != k;
            ++total;
        }
    }
    const double t = seconds_since(t0);
    return {errors == 0 && t < kMaxSeconds,
            fmt("%llu errors over %llu symbols (sf 7..12), %.1f s (limit %.0f s)",
                static_cast<unsigned long long>(errors), static_cast<unsigned long long>(total), t, kMaxSeconds)};
}

// 2. FFT front end and correlation bank pick the same bin on noisy inputs.
Outcome oracle_equivalence() {
    const CssParams p = make(7);
    std::mt19937_64 rng(2002);
    int agree = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        auto r = modulate(p, static_cast<std::uint32_t>(rng() % 128));
        const double snr = -20.0 + static_cast<double>(rng() % 31);
        add_awgn(r.samples, noise_variance(1.0 / 128.0, snr), rng);
        agree += argmax_magnitude(demodulate_fft(p, r)) == argmax_magnitude(demodulate_correlation(p, r));
    }
    return {agree == n, fmt("%d/%d agree (sf 7, SNR -20..10 dB)", agree, n)};
}

// 3. P = 1, Q = 1 is plain argmax demodulation.
Outcome lora_reduction() {
    const CssParams p = make(7);
    Demodulator d(p);
    std::mt19937_64 rng(3003);
    int same = 0;
    const int n = 10000;
    const double snrs[] = {-25.0, -18.0, -12.0, -6.0, 0.0};
    for (int i = 0; i < n; ++i) {
        auto r = modulate(p, static_cast<std::uint32_t>(rng() % 128));
        add_awgn(r.samples, noise_variance(1.0 / 128.0, snrs[i % 5]), rng);
        const auto f = d.process(r.samples);
        const auto plain = static_cast<std::uint32_t>(argmax_magnitude(demodulate_fft(p, r)));
        same += f.decision_mod == plain && f.decision_enhanced == plain;
    }
    return {same == n, fmt("%d/%d identical decisions (sf 7, SNR -25..0 dB)", same, n)};
}

// 4. Four-tap line at sf 10, P 16: every symbol after every predecessor.
Outcome containment() {
    const CssParams p = make(10, 16);
    const auto g_count = static_cast<std::uint32_t>(p.superbin_count());
    Demodulator d(p);
    std::uint64_t errors = 0, total = 0;
    for (std::uint32_t g = 0; g < g_count; ++g) {
        const auto w = modulate_superbin(p, g).samples;
        for (std::uint32_t prev = 0; prev < g_count; ++prev) {
            std::vector<Complex> tx = modulate_superbin(p, prev).samples;
            tx.insert(tx.end(), w.begin(), w.end());
            std::vector<Complex> rx(tx.size());
            MultipathStream(four_tap_channel()).process(tx, rx);
            errors += d.process(std::span<const Complex>(rx).subspan(p.chips())).decision_mod != g;
            ++total;
        }
    }
    return {errors == 0, fmt("%llu errors over %llu (predecessor, symbol) pairs", static_cast<unsigned long long>(errors),
                             static_cast<unsigned long long>(total))};
}

// 5. Small superbins lose to large ones on a 20-sample Rayleigh channel.
Outcome superbin_trend() {
    constexpr double kMaxSeconds = 600.0;
    ExperimentConfig c;
    c.params.sf = 12;
    c.superbin_sizes = {4, 8, 16, 32, 64};
    c.channel = ChannelSpec::rayleigh(20.0);
    c.snr_grid_db = {-12.0};
    c.trials = 1000;
    c.master_seed = 7;
    const auto t0 = Clock::now();
    const auto rs = run_ser_sweep(c);
    const double t = seconds_since(t0);
    double worst_small_lo = 1.0, worst_large_hi = 0.0;
    std::string detail;
    for (const auto& r : rs) {
        detail += fmt("P%zu %.3f [%.3f,%.3f] ", r.superbin_size, r.ser, r.ci_lo, r.ci_hi);
        if (r.superbin_size <= 16) worst_small_lo = std::min(worst_small_lo, r.ci_lo);
        else worst_large_hi = std::max(worst_large_hi, r.ci_hi);
    }
    return {worst_small_lo > worst_large_hi && t < kMaxSeconds, detail + fmt("; %.0f s", t)};
}

// 6. SF 13, P 64, 10-sample Rayleigh: Q = 1 above 0.5 at -25 dB, Q = 100 below
// 0.02 at -35 dB. Each claim passes if the 95% interval admits it.
Outcome enhanced_thresholds() {
    constexpr double kMaxSeconds = 1800.0;
    ExperimentConfig c;
    c.params.sf = 13;
    c.params.bandwidth_hz = 25000;
    c.superbin_sizes = {64};
    c.channel = ChannelSpec::rayleigh(10.0);
    c.mode = DemodMode::enhanced;
    c.trials = 500;
    c.master_seed = 1;
    const auto t0 = Clock::now();
    c.averaging_depths = {1};
    c.snr_grid_db = {-25.0};
    const SerResult q1 = run_ser_sweep(c).at(0);
    c.averaging_depths = {100};
    c.snr_grid_db = {-35.0};
    const SerResult q100 = run_ser_sweep(c).at(0);
    const double t = seconds_since(t0);
    const bool ok1 = q1.ci_hi > 0.5;
    const bool ok100 = q100.ci_lo < 0.02;
    return {ok1 && ok100 && t < kMaxSeconds,
            fmt("Q=1 @ -25 dB: %.3f [%.3f,%.3f] (need > 0.5) %s; Q=100 @ -35 dB: %.3f [%.3f,%.3f] (need < 0.02) %s; %.0f s",
                q1.ser, q1.ci_lo, q1.ci_hi, ok1 ? "ok" : "miss", q100.ser, q100.ci_lo, q100.ci_hi,
                ok100 ? "ok" : "miss", t)};
}

// 7. Bench line in simulation: SF 10, 50 kHz, four taps, -19 dB, Q = 64.
Outcome bench_line() {
    constexpr double kMaxSeconds = 300.0;
    ExperimentConfig c;
    c.params.sf = 10;
    c.params.bandwidth_hz = 50000;
    c.superbin_sizes = {16};
    c.averaging_depths = {64};
    c.channel = ChannelSpec::named("four-tap");
    c.regeneration = ChannelRegeneration::fixed;
    c.mode = DemodMode::both;
    c.snr_grid_db = {-19.0};
    c.trials = 200;
    c.master_seed = 1;
    const auto t0 = Clock::now();
    const auto rs = run_ser_sweep(c);
    const double t = seconds_since(t0);
    std::uint64_t errors = 0;
    double mod_ser = 0.0;
    for (const auto& r : rs) {
        if (r.mode == "enhanced") errors = r.errors;
        else mod_ser = r.ser;
    }
    return {errors == 0 && t < kMaxSeconds,
            fmt("%llu errors in 200 windows of 64 frames (single-frame SER %.3f); %.1f s",
                static_cast<unsigned long long>(errors), mod_ser, t)};
}

// 8. Running-mean variance falls as 1/Q on noise-only input.
Outcome variance_narrowing() {
    const CssParams p = make(7, 8);
    const ChirpFrontEnd fe(p);
    const std::size_t depths[] = {5, 50, 500};
    constexpr std::size_t kWindows = 10000;
    std::vector<RunningMeanState> states;
    for (auto q : depths) states.emplace_back(p.superbin_count(), q);
    std::vector<Moments> h(3);
    Moments s;
    std::mt19937_64 rng(8008);
    std::vector<Complex> r(128), scratch(128), y(128);
    std::vector<double> avg(p.superbin_count());
    for (std::size_t frame = 0; frame < kWindows * 500; ++frame) {
        std::fill(r.begin(), r.end(), Complex{});
        add_awgn(r, 1.0, rng);
        fe.spectrum(r, scratch, y);
        const auto e = superbin_energies(p, y);
        for (double v : e) s.add(v);
        for (std::size_t i = 0; i < 3; ++i) {
            if (frame / depths[i] >= kWindows) continue;
            states[i].update(e, avg);
            if (states[i].frames_seen() == depths[i]) {
                for (double v : avg) h[i].add(v);
                states[i].reset();
            }
        }
    }
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < 3; ++i) {
        const double ratio = h[i].variance() * static_cast<double>(depths[i]) / s.variance();
        ok &= ratio >= 0.9 && ratio <= 1.1;
        detail += fmt("Q=%zu ratio %.4f; ", depths[i], ratio);
    }
    return {ok, detail + "need [0.9, 1.1], 10^4 windows each"};
}

// 9. Mean of the largest noise superbin against the Gaussian extreme-value estimate.
Outcome expected_max() {
    const double snr = -20.0;
    const std::size_t sizes[] = {256, 64};  // G = 16, 64 at sf 12
    const CssParams base = make(12);
    const ChirpFrontEnd fe(base);
    std::mt19937_64 rng(9009);
    const int frames = 100000;
    double acc[2] = {0, 0};
    std::vector<Complex> r(base.chips()), scratch(base.chips()), y(base.chips());
    const auto w = modulate(base, 0).samples;
    const double var = noise_variance(1.0 / static_cast<double>(base.chips()), snr);
    for (int f = 0; f < frames; ++f) {
        r = w;
        add_awgn(r, var, rng);
        fe.spectrum(r, scratch, y);
        for (int i = 0; i < 2; ++i) {
            const auto e = superbin_energies(sizes[i], y);
            acc[i] += *std::max_element(e.begin() + 1, e.end());
        }
    }
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 2; ++i) {
        const NoiseModel m = NoiseModel::for_link(make(12, sizes[i]), snr);
        const double predicted = expected_max_noise(m);
        const double measured = acc[i] / frames;
        const double rel = std::abs(measured - predicted) / predicted;
        ok &= rel <= 0.05;
        detail += fmt("G=%zu measured %.5g predicted %.5g (%.2f%%); ", m.g_count, measured, predicted, 100 * rel);
    }
    return {ok, detail + "need within 5%, 10^5 frames"};
}

// 10. Time on air by formula, to three significant figures.
Outcome airtime() {
    struct Row {
        int sf;
        double bw;
        std::size_t q;
        const char* three_sf;
        double rounded;
    };
    const Row rows[] = {{13, 25000, 1, "0.328", 0.33},
                        {13, 25000, 10, "3.28", 3.3},
                        {13, 25000, 100, "32.8", 33.0},
                        {10, 50000, 64, "1.31", 1.3}};
    bool ok = true;
    std::string detail;
    for (const auto& row : rows) {
        const double t = airtime_table({row.sf}, row.bw, {row.q}).at(0).time_on_air_s;
        const double exact = static_cast<double>(row.q) * std::ldexp(1.0, row.sf) / row.bw;
        const std::string shown = fmt("%.3g", t);
        const bool same = std::abs(t - exact) <= 1e-12 * exact && shown == row.three_sf &&
                          std::stod(fmt("%.2g", t)) == row.rounded;
        ok &= same;
        detail += fmt("sf%d Q%zu %s s; ", row.sf, row.q, shown.c_str());
    }
    return {ok, detail};
}

// 11. Byte-identical result files across reruns and worker counts.
Outcome determinism() {
    ExperimentConfig c;
    c.params.sf = 9;
    c.superbin_sizes = {4, 16};
    c.averaging_depths = {1, 4};
    c.channel = ChannelSpec::rayleigh(4.0);
    c.snr_grid_db = {-16.0, -12.0, -8.0};
    c.trials = 300;
    c.master_seed = 1111;
    c.mode = DemodMode::both;
    const auto dir = std::filesystem::temp_directory_path() / "cssplc_acceptance";
    std::filesystem::create_directories(dir);
    auto files = [&](unsigned workers, const std::string& tag) {
        c.workers = workers;
        const auto rs = run_ser_sweep(c);
        std::string bytes;
        for (auto fmt_kind : {ResultFormat::csv, ResultFormat::json}) {
            const auto path = dir / (tag + (fmt_kind == ResultFormat::csv ? ".csv" : ".json"));
            emit_results(rs, fmt_kind, path, c);
            std::ifstream in(path, std::ios::binary);
            std::ostringstream os;
            os << in.rdbuf();
            bytes += os.str();
        }
        return bytes;
    };
    const auto a = files(1, "w1");
    const auto b = files(4, "w4");
    const auto a2 = files(1, "w1b");
    const auto d = files(0, "wall");
    const bool ok = a == b && a == a2 && a == d && !a.empty();
    return {ok, fmt("CSV+JSON %zu bytes; workers 1/4/all and rerun %s", a.size(), ok ? "identical" : "differ")};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number(s), 1..11 (default: all)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty()) {
        for (int i = 1; i <= 11; ++i) selected.push_back(i);
    }

    const std::function<Outcome()> checks[] = {roundtrip,          oracle_equivalence, lora_reduction, containment,
                                               superbin_trend,     enhanced_thresholds, bench_line,    variance_narrowing,
                                               expected_max,       airtime,            determinism};
    const char* names[] = {"roundtrip exactness",  "fft/correlation equivalence", "P=1 Q=1 reduction",
                           "multipath containment", "superbin size trend",         "enhanced SER thresholds",
                           "bench line replication", "variance narrowing",        "expected maximum",
                           "airtime",              "determinism"};
    int failures = 0;
    for (int n : selected) {
        Outcome o;
        try {
            o = checks[n - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << names[n - 1] << "): " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
