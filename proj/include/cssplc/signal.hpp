#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cssplc {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Complex baseband samples plus the rate they were taken at.
struct ComplexSignal {
    std::vector<Complex> samples;
    double sample_rate_hz = 1.0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    std::span<const Complex> view() const noexcept { return samples; }

    /// Sum of |x|^2.
    double energy() const noexcept;
    /// Mean of |x|^2; 0 for an empty signal.
    double mean_power() const noexcept;
    bool all_finite() const noexcept;
};

double energy(std::span<const Complex> x) noexcept;

} // namespace cssplc
