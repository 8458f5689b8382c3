#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cssplc/signal.hpp"

namespace cssplc {

// I/Q signal file, version 1. A text header of "key: value" lines, terminated
// by a line reading "end_header", followed by num_samples pairs of
// little-endian IEEE-754 float32 values (I then Q):
//
//   # cssplc-iq v1
//   sample_rate_hz: 125000
//   sf: 7
//   superbin_size: 1
//   num_samples: 128
//   tool_version: 0.3.1
//   config: {"sf":7,...}
//   end_header
//
// Stripping everything up to and including the "end_header\n" line leaves a
// raw cf32 stream that SDR tools read directly.

struct SignalFile {
    ComplexSignal signal;
    int sf = 7;
    std::size_t superbin_size = 1;
    std::string tool_version;
    nlohmann::json config;
};

void write_signal(std::ostream& out, const SignalFile& file);
/// Throws ParseError for a malformed header or truncated payload.
SignalFile read_signal(std::istream& in, const std::string& source_name);

/// Atomic write; throws IoError.
void save_signal_file(const std::filesystem::path& path, const SignalFile& file);
SignalFile load_signal_file(const std::filesystem::path& path);

} // namespace cssplc
