#include "cli_app.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cssplc/analysis.hpp"
#include "cssplc/channel.hpp"
#include "cssplc/chirp.hpp"
#include "cssplc/config.hpp"
#include "cssplc/demod.hpp"
#include "cssplc/errors.hpp"
#include "cssplc/harness.hpp"
#include "cssplc/params.hpp"
#include "cssplc/results_io.hpp"
#include "cssplc/signal_file.hpp"

namespace cssplc::cli {

namespace {

using nlohmann::json;

std::uint32_t parse_index(const std::string& s) {
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
        throw ConfigError("bad symbol '" + s + "'");
    }
    return v;
}

// "0..127", "3,1,4" or a mix such as "0..3,9".
std::vector<std::uint32_t> parse_symbol_list(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_index(item));
            continue;
        }
        const auto lo = parse_index(item.substr(0, dots));
        const auto hi = parse_index(item.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty symbol range '" + item + "'");
        for (std::uint64_t k = lo; k <= hi; ++k) out.push_back(static_cast<std::uint32_t>(k));
    }
    if (out.empty()) throw ConfigError("no symbols given");
    return out;
}

// identity | four-tap | rayleigh:RMS[:TAPS] | file:PATH
ChannelSpec parse_channel_flag(const std::string& text) {
    if (text == "identity") return ChannelSpec::identity();
    if (text.rfind("file:", 0) == 0) return ChannelSpec::file(text.substr(5));
    if (text.rfind("rayleigh:", 0) == 0) {
        const std::string rest = text.substr(9);
        const auto colon = rest.find(':');
        double rms = 0.0;
        try {
            std::size_t used = 0;
            rms = std::stod(rest.substr(0, colon), &used);
            if (used != rest.substr(0, colon).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("bad Rayleigh delay spread in '" + text + "'");
        }
        std::size_t taps = 0;
        if (colon != std::string::npos) taps = parse_index(rest.substr(colon + 1));
        return ChannelSpec::rayleigh(rms, taps);
    }
    return ChannelSpec::named(text);
}

struct ExperimentFlags {
    std::string config_path;
    int sf = 0;
    double bw = 0.0;
    std::vector<std::size_t> p, q;
    std::vector<double> snr;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string mode, channel, regen, output, format;
    int timing_offset = 0;
    unsigned workers = 0;
    std::uint32_t symbol = 0;
    std::vector<std::size_t> depths;

    CLI::Option *sf_opt{}, *bw_opt{}, *p_opt{}, *q_opt{}, *snr_opt{}, *trials_opt{}, *seed_opt{}, *mode_opt{},
        *channel_opt{}, *regen_opt{}, *offset_opt{}, *workers_opt{}, *symbol_opt{}, *depths_opt{};

    void attach(CLI::App* cmd, bool capture) {
        cmd->add_option("-c,--config", config_path, "JSON experiment file; flags override its values");
        sf_opt = cmd->add_option("--sf", sf, "Spreading factor (7..14)");
        bw_opt = cmd->add_option("--bw", bw, "Bandwidth in Hz");
        p_opt = cmd->add_option("--p", p, "Superbin size(s) P")->delimiter(',');
        snr_opt = cmd->add_option("--snr", snr, "SNR grid in dB, comma separated")->delimiter(',');
        trials_opt = cmd->add_option("--trials", trials, capture ? "Frames per SNR point" : "Decisions per grid point");
        seed_opt = cmd->add_option("--seed", seed, "Master seed");
        channel_opt = cmd->add_option("--channel", channel,
                                      "identity | four-tap | rayleigh:RMS[:TAPS] | file:PATH");
        regen_opt = cmd->add_option("--regen", regen, "Channel regeneration: per-trial | fixed");
        offset_opt = cmd->add_option("--timing-offset", timing_offset, "Receiver framing offset in samples");
        workers_opt = cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
        if (capture) {
            symbol_opt = cmd->add_option("--symbol", symbol, "Transmitted superbin symbol");
            depths_opt = cmd->add_option("--depths", depths, "Running-mean depths to capture")->delimiter(',');
            cmd->add_option("-o,--output", output, "Raw samples CSV")->required();
            cmd->add_option("--summary", format, "Also write summary statistics JSON here");
        } else {
            q_opt = cmd->add_option("--q", q, "Averaging depth(s) Q")->delimiter(',');
            mode_opt = cmd->add_option("--mode", mode, "mod | enhanced | both");
            cmd->add_option("-o,--output", output, "Results file (.csv or .json)")->required();
            cmd->add_option("--format", format, "csv | json (default from the file extension)");
        }
    }

    ExperimentConfig build() const {
        ExperimentConfig c;
        if (!config_path.empty()) c = load_experiment_config(config_path);
        if (*sf_opt) c.params.sf = sf;
        if (*bw_opt) c.params.bandwidth_hz = bw;
        if (*p_opt) c.superbin_sizes = p;
        if (q_opt && *q_opt) c.averaging_depths = q;
        if (*snr_opt) c.snr_grid_db = snr;
        if (*trials_opt) c.trials = trials;
        if (*seed_opt) c.master_seed = seed;
        if (mode_opt && *mode_opt) c.mode = parse_demod_mode(mode);
        if (*channel_opt) c.channel = parse_channel_flag(channel);
        if (*regen_opt) c.regeneration = parse_channel_regeneration(regen);
        if (*offset_opt) c.timing_offset = timing_offset;
        if (*workers_opt) c.workers = workers;
        if (symbol_opt && *symbol_opt) c.capture_symbol = symbol;
        if (depths_opt && *depths_opt) c.capture_depths = depths;
        c.validate();
        return c;
    }
};

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sig3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

int cmd_modulate(const CssParams& params, const std::vector<std::uint32_t>& symbols, const std::string& output,
                 std::ostream& out) {
    params.validate();
    SignalFile f;
    f.sf = params.sf;
    f.superbin_size = params.superbin_size;
    f.signal.sample_rate_hz = params.bandwidth_hz;
    f.signal.samples.reserve(symbols.size() * params.chips());
    for (auto g : symbols) {
        const ComplexSignal w = modulate_superbin(params, g);
        f.signal.samples.insert(f.signal.samples.end(), w.samples.begin(), w.samples.end());
    }
    f.config = {{"command", "modulate"},
                {"sf", params.sf},
                {"bandwidth_hz", params.bandwidth_hz},
                {"superbin_size", params.superbin_size},
                {"symbol_energy", params.symbol_energy},
                {"symbols", symbols}};
    save_signal_file(output, f);
    out << "wrote " << symbols.size() << " symbols (" << f.signal.size() << " samples) to " << output << '\n';
    return kOk;
}

int cmd_demodulate(const std::string& input, std::optional<std::size_t> p, std::size_t q, bool sliding,
                   std::ostream& out) {
    const SignalFile f = load_signal_file(input);
    CssParams params;
    params.sf = f.sf;
    params.bandwidth_hz = f.signal.sample_rate_hz;
    params.superbin_size = p.value_or(f.superbin_size);
    params.averaging_depth = q;
    if (f.config.is_object() && f.config.contains("symbol_energy") && f.config["symbol_energy"].is_number()) {
        params.symbol_energy = f.config["symbol_energy"].get<double>();
    }
    params.validate();
    const std::size_t m = params.chips();
    if (f.signal.size() % m != 0) {
        throw FramingError(input + ": " + std::to_string(f.signal.size()) + " samples is not a whole number of " +
                           std::to_string(m) + "-sample symbols");
    }
    json cfg = {{"command", "demodulate"},
                {"input", input},
                {"sf", params.sf},
                {"superbin_size", params.superbin_size},
                {"averaging_depth", q},
                {"window", sliding ? "sliding" : "reset-every-q"}};
    out << "# tool_version: " << kToolVersion << "\n# config: " << cfg.dump() << '\n'
        << "frame,decision_mod,decision_enhanced\n";
    Demodulator demod(params);
    DemodFrame frame;
    const std::size_t frames = f.signal.size() / m;
    for (std::size_t i = 0; i < frames; ++i) {
        if (!sliding && i % q == 0) demod.reset();
        demod.process_into(std::span<const Complex>(f.signal.samples).subspan(i * m, m), frame);
        out << i << ',' << frame.decision_mod << ',' << frame.decision_enhanced << '\n';
    }
    return kOk;
}

int cmd_channel_gen(const std::string& spec_text, std::uint64_t seed, const std::string& output, std::ostream& out) {
    const ChannelSpec spec = parse_channel_flag(spec_text);
    spec.validate();
    const ImpulseResponse h = spec.realize(seed);
    std::ostringstream os;
    write_impulse_response(os, h);
    json cfg = {{"command", "channel-gen"}, {"channel", channel_to_json(spec)}, {"seed", seed}};
    os << "# tool_version: " << kToolVersion << "\n# config: " << cfg.dump() << '\n';
    if (output.empty()) {
        out << os.str();
    } else {
        write_file_atomic(output, os.str());
        out << "wrote " << h.taps().size() << " taps, rms delay spread " << format_double(rms_delay_spread(h))
            << " samples, to " << output << '\n';
    }
    return kOk;
}

int cmd_sweep(const ExperimentFlags& flags, std::ostream& out) {
    const ExperimentConfig c = flags.build();
    const ResultFormat fmt = flags.format.empty() ? format_for_path(flags.output) : parse_result_format(flags.format);
    const auto results = run_ser_sweep(c);
    emit_results(results, fmt, flags.output, c);
    out << "snr_db  P     Q     mode      errors/trials     ser        ci95              time_s\n";
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "%-7s %-5zu %-5zu %-9s %7llu/%-9llu %-10.4g [%.4g, %.4g]  %.2f\n",
                      format_double(r.snr_db).c_str(), r.superbin_size, r.averaging_depth, r.mode.c_str(),
                      static_cast<unsigned long long>(r.errors), static_cast<unsigned long long>(r.trials), r.ser,
                      r.ci_lo, r.ci_hi, r.wall_time_s);
        out << line;
    }
    out << "wrote " << results.size() << " rows to " << flags.output << '\n';
    return kOk;
}

int cmd_capture(const ExperimentFlags& flags, std::ostream& out) {
    ExperimentConfig c = flags.build();
    const auto captures = run_distribution_capture(c);
    std::ostringstream os;
    write_capture_csv(os, captures, c);
    write_file_atomic(flags.output, os.str());
    if (!flags.format.empty()) write_file_atomic(flags.format, capture_summary_json(captures, c).dump(2) + "\n");
    for (const auto& cap : captures) {
        out << "snr " << format_double(cap.snr_db) << " dB: mean signal " << fixed(mean_of(cap.signal), 4)
            << ", mean max noise " << fixed(mean_of(cap.max_noise), 4) << " (normalized to mean noise superbin)\n";
    }
    out << "wrote " << flags.output << '\n';
    return kOk;
}

int cmd_airtime(const std::vector<int>& sfs, double bw, const std::vector<std::size_t>& qs, bool as_json,
                std::ostream& out) {
    const auto rows = airtime_table(sfs, bw, qs);
    if (as_json) {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"sf", r.sf}, {"bandwidth_hz", r.bandwidth_hz}, {"q", r.q}, {"time_on_air_s", r.time_on_air_s}});
        }
        json doc = {{"tool_version", kToolVersion},
                    {"config", {{"sf", sfs}, {"bandwidth_hz", bw}, {"q", qs}}},
                    {"rows", arr}};
        out << doc.dump(2) << '\n';
        return kOk;
    }
    out << "sf  bandwidth_hz  q      time_on_air_s  (3 s.f.)\n";
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof line, "%-3d %-13s %-6zu %-14s %s\n", r.sf, format_double(r.bandwidth_hz).c_str(),
                      r.q, format_double(r.time_on_air_s).c_str(), sig3(r.time_on_air_s).c_str());
        out << line;
    }
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chirp spread spectrum modem and Monte Carlo simulator for multipath power-line links", "cssplc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // modulate
    auto* mod = app.add_subcommand("modulate", "Write the chirps for a symbol sequence to an I/Q file");
    CssParams mod_params;
    std::string mod_symbols, mod_output;
    std::vector<std::uint32_t> mod_symbol;
    mod->add_option("--sf", mod_params.sf, "Spreading factor (7..14)")->capture_default_str();
    mod->add_option("--bw", mod_params.bandwidth_hz, "Bandwidth in Hz")->capture_default_str();
    mod->add_option("--p", mod_params.superbin_size, "Superbin size P; symbols are superbin indices")
        ->capture_default_str();
    mod->add_option("--es", mod_params.symbol_energy, "Symbol energy")->capture_default_str();
    auto* sym_opt = mod->add_option("--symbol", mod_symbol, "Symbol (repeatable)");
    auto* syms_opt = mod->add_option("--symbols", mod_symbols, "Symbol list, e.g. 0..127 or 3,1,4");
    sym_opt->excludes(syms_opt);
    mod->add_option("-o,--output", mod_output, "Output I/Q file")->required();

    // demodulate
    auto* dem = app.add_subcommand("demodulate", "Decide every symbol of an I/Q file");
    std::string dem_input;
    std::size_t dem_p = 0, dem_q = 1;
    bool dem_sliding = false;
    dem->add_option("-i,--input", dem_input, "Input I/Q file")->required();
    auto* dem_p_opt = dem->add_option("--p", dem_p, "Superbin size (default: from the file header)");
    dem->add_option("--q", dem_q, "Averaging depth Q")->capture_default_str();
    dem->add_flag("--sliding", dem_sliding, "Keep a sliding Q-frame mean instead of resetting every Q frames");

    // channel-gen
    auto* chg = app.add_subcommand("channel-gen", "Write an impulse-response CSV");
    std::string chg_spec = "four-tap", chg_output;
    std::uint64_t chg_seed = 1;
    chg->add_option("--channel", chg_spec, "identity | four-tap | rayleigh:RMS[:TAPS]")->capture_default_str();
    chg->add_option("--seed", chg_seed, "Seed for random channels")->capture_default_str();
    chg->add_option("-o,--output", chg_output, "Output CSV (default: stdout)");

    // sweep / capture
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo symbol error rate sweep");
    ExperimentFlags sweep_flags;
    sweep_flags.attach(sweep, false);
    auto* capture = app.add_subcommand("capture", "Capture superbin energy distributions for a repeated symbol");
    ExperimentFlags capture_flags;
    capture_flags.attach(capture, true);

    // airtime
    auto* air = app.add_subcommand("airtime", "Time on air per decision, Q 2^sf / bandwidth");
    std::vector<int> air_sf{13};
    double air_bw = 25000.0;
    std::vector<std::size_t> air_q{1, 10, 100};
    bool air_json = false;
    air->add_option("--sf", air_sf, "Spreading factor(s)")->delimiter(',')->capture_default_str();
    air->add_option("--bw", air_bw, "Bandwidth in Hz")->capture_default_str();
    air->add_option("--q", air_q, "Averaging depth(s)")->delimiter(',')->capture_default_str();
    air->add_flag("--json", air_json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*mod) {
            std::vector<std::uint32_t> symbols = mod_symbol;
            if (*syms_opt) symbols = parse_symbol_list(mod_symbols);
            if (symbols.empty()) throw ConfigError("give --symbol or --symbols");
            return cmd_modulate(mod_params, symbols, mod_output, out);
        }
        if (*dem) {
            if (dem_q < 1) throw ConfigError("--q must be at least 1");
            return cmd_demodulate(dem_input, *dem_p_opt ? std::optional<std::size_t>(dem_p) : std::nullopt, dem_q,
                                  dem_sliding, out);
        }
        if (*chg) return cmd_channel_gen(chg_spec, chg_seed, chg_output, out);
        if (*sweep) return cmd_sweep(sweep_flags, out);
        if (*capture) return cmd_capture(capture_flags, out);
        if (*air) return cmd_airtime(air_sf, air_bw, air_q, air_json, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}

} // namespace cssplc::cli
