#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cssplc/harness.hpp"

namespace cssplc {

// Results CSV, schema "cssplc-ser-results" version 1:
//
//   # cssplc-ser-results v1
//   # tool_version: <version>
//   # master_seed: <seed>
//   # config: <effective config as one-line JSON>
//   snr_db,sf,superbin_size,averaging_depth,mode,channel,errors,trials,ser,ci95_lo,ci95_hi
//   ...
//
// Reals use the shortest representation that round-trips; +inf is "inf".
// Fields containing a comma or quote are double-quoted. Wall times and the
// worker count are deliberately absent so reruns compare byte for byte.

inline constexpr const char* kResultsSchema = "cssplc-ser-results";
inline constexpr int kResultsSchemaVersion = 1;

enum class ResultFormat { csv, json };

ResultFormat parse_result_format(const std::string& text);
/// ".json" selects JSON, anything else CSV.
ResultFormat format_for_path(const std::filesystem::path& path);

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

void write_results_csv(std::ostream& out, const std::vector<SerResult>& results, const ExperimentConfig& config);
nlohmann::json results_to_json(const std::vector<SerResult>& results, const ExperimentConfig& config);

/// Parses a results CSV back. Throws ParseError with line numbers on schema
/// violations.
std::vector<SerResult> parse_results_csv(std::istream& in, const std::string& source_name);

/// Writes `content` to a temporary sibling and renames it over `path`, so a
/// reader never sees a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Serializes and writes atomically. Throws ParameterError on empty results.
void emit_results(const std::vector<SerResult>& results, ResultFormat format, const std::filesystem::path& path,
                  const ExperimentConfig& config);

// Distribution capture, long format: snr_db,quantity,q,value with quantity in
// {signal, noise, max_noise}; q = 1 for per-frame values, otherwise the
// running-mean depth. Same '#' provenance header as the results CSV.
void write_capture_csv(std::ostream& out, const std::vector<DistributionCapture>& captures,
                       const ExperimentConfig& config);

/// Summary statistics (see histogram_stats) of every captured set.
nlohmann::json capture_summary_json(const std::vector<DistributionCapture>& captures, const ExperimentConfig& config);

} // namespace cssplc
