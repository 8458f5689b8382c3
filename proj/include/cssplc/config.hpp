#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cssplc/harness.hpp"

namespace cssplc {

// Experiment files are JSON objects. Recognized keys:
//
//   sf, bandwidth_hz, superbin_size, averaging_depth, symbol_energy
//   superbin_sizes, averaging_depths          lists swept instead of the scalars
//   channel: {"type": "identity" | "preset" | "rayleigh" | "file",
//             "name", "rms_samples", "num_taps", "path"}
//   channel_regeneration: "per-trial" | "fixed"
//   snr_db: [..], trials, seed, mode, timing_offset, workers
//   capture: {"symbol", "depths": [..]}
//
// Keys starting with '_' are ignored (use them for comments). Anything else
// unknown is an error, so typos do not silently fall back to defaults.

/// Applies the keys present in `j` on top of `base`. Throws ConfigError naming
/// `source` and the offending key.
ExperimentConfig apply_config_json(ExperimentConfig base, const nlohmann::json& j, const std::string& source);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Effective configuration as written into result files. Omits `workers`,
/// which never influences results.
nlohmann::json config_to_json(const ExperimentConfig& config);

nlohmann::json channel_to_json(const ChannelSpec& channel);

} // namespace cssplc
