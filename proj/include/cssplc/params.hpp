#pragma once

#include <cstddef>
#include <cstdint>

namespace cssplc {

inline constexpr const char* kToolVersion = "0.3.1";

/// Chirp spread spectrum parameters shared by every pipeline stage.
///
/// `superbin_size` (P) groups P adjacent spectrum bins into one decision
/// variable; `averaging_depth` (Q) is the number of repeated symbols the
/// enhanced receiver averages. P = 1, Q = 1 is plain LoRa.
struct CssParams {
    int sf = 7;
    double bandwidth_hz = 125'000.0;
    std::size_t superbin_size = 1;
    std::size_t averaging_depth = 1;
    double symbol_energy = 1.0;

    /// Throws ParameterError when any invariant is violated.
    void validate() const;

    /// Samples (and spectrum bins) per symbol, 2^sf.
    std::size_t chips() const noexcept { return std::size_t{1} << sf; }
    /// Number of superbin symbols G = 2^sf / P.
    std::size_t superbin_count() const noexcept { return chips() / superbin_size; }
    /// sf - log2(P).
    int bits_per_symbol() const noexcept;
    double symbol_duration_s() const noexcept { return static_cast<double>(chips()) / bandwidth_hz; }
    double sample_interval_s() const noexcept { return 1.0 / bandwidth_hz; }

    bool operator==(const CssParams&) const = default;
};

inline constexpr int kMinSpreadingFactor = 7;
inline constexpr int kMaxSpreadingFactor = 14;

constexpr bool is_power_of_two(std::size_t v) noexcept { return v != 0 && (v & (v - 1)) == 0; }

} // namespace cssplc
