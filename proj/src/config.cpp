#include "cssplc/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "cssplc/errors.hpp"

namespace cssplc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& key, const std::string& what) {
    throw ConfigError(source + ": '" + key + "': " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& source,
                const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (!k.empty() && k[0] == '_') continue;
        if (!allowed.count(k)) fail(source, prefix + k, "unknown key");
    }
}

template <class T>
T get_unsigned(const json& v, const std::string& source, const std::string& key) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        fail(source, key, "expected a non-negative integer");
    }
    const auto u = v.get<unsigned long long>();
    if (u > std::numeric_limits<T>::max()) fail(source, key, "value too large");
    return static_cast<T>(u);
}

int get_int(const json& v, const std::string& source, const std::string& key) {
    if (!v.is_number_integer()) fail(source, key, "expected an integer");
    const auto i = v.get<long long>();
    if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) fail(source, key, "out of range");
    return static_cast<int>(i);
}

double get_double(const json& v, const std::string& source, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    // JSON has no infinity literal; accept the strings "inf" / "+inf".
    if (v.is_string() && (v == "inf" || v == "+inf")) return std::numeric_limits<double>::infinity();
    fail(source, key, "expected a number");
}

std::string get_string(const json& v, const std::string& source, const std::string& key) {
    if (!v.is_string()) fail(source, key, "expected a string");
    return v.get<std::string>();
}

std::vector<std::size_t> get_size_list(const json& v, const std::string& source, const std::string& key) {
    if (!v.is_array()) fail(source, key, "expected a list");
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(get_unsigned<std::size_t>(e, source, key));
    return out;
}

ChannelSpec parse_channel(const json& j, const std::string& source) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        return name == "identity" ? ChannelSpec::identity() : ChannelSpec::named(name);
    }
    if (!j.is_object()) fail(source, "channel", "expected an object or preset name");
    check_keys(j, {"type", "name", "rms_samples", "num_taps", "path"}, source, "channel.");
    if (!j.contains("type")) fail(source, "channel.type", "missing");
    const std::string type = get_string(j["type"], source, "channel.type");
    if (type == "identity") return ChannelSpec::identity();
    if (type == "preset") {
        if (!j.contains("name")) fail(source, "channel.name", "missing");
        return ChannelSpec::named(get_string(j["name"], source, "channel.name"));
    }
    if (type == "rayleigh") {
        if (!j.contains("rms_samples")) fail(source, "channel.rms_samples", "missing");
        const double rms = get_double(j["rms_samples"], source, "channel.rms_samples");
        const std::size_t taps = j.contains("num_taps") ? get_unsigned<std::size_t>(j["num_taps"], source, "channel.num_taps") : 0;
        return ChannelSpec::rayleigh(rms, taps);
    }
    if (type == "file") {
        if (!j.contains("path")) fail(source, "channel.path", "missing");
        return ChannelSpec::file(get_string(j["path"], source, "channel.path"));
    }
    fail(source, "channel.type", "unknown channel type '" + type + "'");
}

} // namespace

ExperimentConfig apply_config_json(ExperimentConfig c, const json& j, const std::string& source) {
    if (!j.is_object()) throw ConfigError(source + ": top level must be a JSON object");
    check_keys(j,
               {"sf", "bandwidth_hz", "superbin_size", "averaging_depth", "symbol_energy", "superbin_sizes",
                "averaging_depths", "channel", "channel_regeneration", "snr_db", "trials", "seed", "mode",
                "timing_offset", "workers", "capture"},
               source, "");
    try {
        if (j.contains("sf")) c.params.sf = get_int(j["sf"], source, "sf");
        if (j.contains("bandwidth_hz")) c.params.bandwidth_hz = get_double(j["bandwidth_hz"], source, "bandwidth_hz");
        if (j.contains("superbin_size")) c.params.superbin_size = get_unsigned<std::size_t>(j["superbin_size"], source, "superbin_size");
        if (j.contains("averaging_depth")) c.params.averaging_depth = get_unsigned<std::size_t>(j["averaging_depth"], source, "averaging_depth");
        if (j.contains("symbol_energy")) c.params.symbol_energy = get_double(j["symbol_energy"], source, "symbol_energy");
        if (j.contains("superbin_sizes")) c.superbin_sizes = get_size_list(j["superbin_sizes"], source, "superbin_sizes");
        if (j.contains("averaging_depths")) c.averaging_depths = get_size_list(j["averaging_depths"], source, "averaging_depths");
        if (j.contains("channel")) c.channel = parse_channel(j["channel"], source);
        if (j.contains("channel_regeneration")) {
            c.regeneration = parse_channel_regeneration(get_string(j["channel_regeneration"], source, "channel_regeneration"));
        }
        if (j.contains("snr_db")) {
            const auto& v = j["snr_db"];
            if (!v.is_array()) fail(source, "snr_db", "expected a list");
            c.snr_grid_db.clear();
            for (const auto& e : v) c.snr_grid_db.push_back(get_double(e, source, "snr_db"));
        }
        if (j.contains("trials")) c.trials = get_unsigned<std::size_t>(j["trials"], source, "trials");
        if (j.contains("seed")) c.master_seed = get_unsigned<std::uint64_t>(j["seed"], source, "seed");
        if (j.contains("mode")) c.mode = parse_demod_mode(get_string(j["mode"], source, "mode"));
        if (j.contains("timing_offset")) c.timing_offset = get_int(j["timing_offset"], source, "timing_offset");
        if (j.contains("workers")) c.workers = get_unsigned<unsigned>(j["workers"], source, "workers");
        if (j.contains("capture")) {
            const auto& cap = j["capture"];
            if (!cap.is_object()) fail(source, "capture", "expected an object");
            check_keys(cap, {"symbol", "depths"}, source, "capture.");
            if (cap.contains("symbol")) c.capture_symbol = get_unsigned<std::uint32_t>(cap["symbol"], source, "capture.symbol");
            if (cap.contains("depths")) c.capture_depths = get_size_list(cap["depths"], source, "capture.depths");
        }
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind(source, 0) == 0) throw;
        throw ConfigError(source + ": " + msg);
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    ExperimentConfig c = apply_config_json(ExperimentConfig{}, j, path.string());
    // Channel files are relative to the config file.
    if (c.channel.kind == ChannelSpec::Kind::file && std::filesystem::path(c.channel.path).is_relative()) {
        c.channel.path = (path.parent_path() / c.channel.path).lexically_normal().string();
    }
    return c;
}

json channel_to_json(const ChannelSpec& ch) {
    switch (ch.kind) {
    case ChannelSpec::Kind::identity: return {{"type", "identity"}};
    case ChannelSpec::Kind::preset: return {{"type", "preset"}, {"name", ch.preset}};
    case ChannelSpec::Kind::rayleigh:
        return {{"type", "rayleigh"},
                {"rms_samples", ch.rms_samples},
                {"num_taps", ch.num_taps ? ch.num_taps : default_rayleigh_taps(ch.rms_samples)}};
    case ChannelSpec::Kind::file: return {{"type", "file"}, {"path", ch.path}};
    }
    return nullptr;
}

json config_to_json(const ExperimentConfig& c) {
    json snr = json::array();
    for (double s : c.snr_grid_db) {
        if (std::isinf(s)) snr.push_back("inf");
        else snr.push_back(s);
    }
    json j = {
        {"sf", c.params.sf},
        {"bandwidth_hz", c.params.bandwidth_hz},
        {"symbol_energy", c.params.symbol_energy},
        {"superbin_sizes", c.effective_superbin_sizes()},
        {"averaging_depths", c.effective_averaging_depths()},
        {"channel", channel_to_json(c.channel)},
        {"channel_regeneration", to_string(c.regeneration)},
        {"snr_db", snr},
        {"trials", c.trials},
        {"seed", c.master_seed},
        {"mode", to_string(c.mode)},
        {"timing_offset", c.timing_offset},
    };
    if (!c.capture_depths.empty()) j["capture"] = {{"symbol", c.capture_symbol}, {"depths", c.capture_depths}};
    return j;
}

} // namespace cssplc
