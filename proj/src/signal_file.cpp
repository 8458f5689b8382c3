#include "cssplc/signal_file.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "cssplc/errors.hpp"
#include "cssplc/params.hpp"
#include "cssplc/results_io.hpp"

namespace cssplc {

namespace {

constexpr const char* kMagic = "# cssplc-iq v1";

void put_f32(std::string& buf, float v) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float get_f32(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

template <class T>
T header_number(const std::map<std::string, std::pair<std::string, std::size_t>>& h, const std::string& key,
                const std::string& source) {
    auto it = h.find(key);
    if (it == h.end()) throw ParseError(source, 0, "header is missing '" + key + "'");
    const std::string& s = it->second.first;
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(source, it->second.second, "bad value for '" + key + "': '" + s + "'");
    }
    return v;
}

} // namespace

void write_signal(std::ostream& out, const SignalFile& f) {
    out << kMagic << '\n'
        << "sample_rate_hz: " << format_double(f.signal.sample_rate_hz) << '\n'
        << "sf: " << f.sf << '\n'
        << "superbin_size: " << f.superbin_size << '\n'
        << "num_samples: " << f.signal.size() << '\n'
        << "tool_version: " << (f.tool_version.empty() ? kToolVersion : f.tool_version) << '\n'
        << "config: " << (f.config.is_null() ? nlohmann::json::object() : f.config).dump() << '\n'
        << "end_header\n";
    std::string buf;
    buf.reserve(f.signal.size() * 8);
    for (const auto& s : f.signal.samples) {
        put_f32(buf, static_cast<float>(s.real()));
        put_f32(buf, static_cast<float>(s.imag()));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

SignalFile read_signal(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line) || line != kMagic) throw ParseError(source, 1, "not a cssplc I/Q file");
    ++lineno;
    std::map<std::string, std::pair<std::string, std::size_t>> header;
    bool ended = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line == "end_header") {
            ended = true;
            break;
        }
        const auto colon = line.find(": ");
        if (colon == std::string::npos) throw ParseError(source, lineno, "expected 'key: value'");
        header[line.substr(0, colon)] = {line.substr(colon + 2), lineno};
    }
    if (!ended) throw ParseError(source, lineno, "header not terminated by end_header");

    SignalFile f;
    f.sf = header_number<int>(header, "sf", source);
    f.superbin_size = header_number<std::size_t>(header, "superbin_size", source);
    f.signal.sample_rate_hz = header_number<double>(header, "sample_rate_hz", source);
    const auto n = header_number<std::size_t>(header, "num_samples", source);
    CssParams params;
    params.sf = f.sf;
    params.superbin_size = f.superbin_size;
    params.bandwidth_hz = f.signal.sample_rate_hz;
    try {
        params.validate();
    } catch (const ParameterError& e) {
        throw ParseError(source, 0, e.what());
    }
    if (auto it = header.find("tool_version"); it != header.end()) f.tool_version = it->second.first;
    if (auto it = header.find("config"); it != header.end()) {
        try {
            f.config = nlohmann::json::parse(it->second.first);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, it->second.second, std::string("bad config JSON: ") + e.what());
        }
    }

    std::string payload(n * 8, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
        throw ParseError(source, 0,
                         "payload truncated: expected " + std::to_string(n) + " samples, got " +
                             std::to_string(static_cast<std::size_t>(in.gcount()) / 8));
    }
    f.signal.samples.resize(n);
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < n; ++i) {
        f.signal.samples[i] = {get_f32(p + 8 * i), get_f32(p + 8 * i + 4)};
    }
    return f;
}

void save_signal_file(const std::filesystem::path& path, const SignalFile& file) {
    std::ostringstream os;
    write_signal(os, file);
    write_file_atomic(path, os.str());
}

SignalFile load_signal_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open signal file " + path.string());
    return read_signal(in, path.string());
}

} // namespace cssplc
