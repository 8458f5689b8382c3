#pragma once

#include <cstddef>
#include <span>

#include "cssplc/signal.hpp"

namespace cssplc {

/// Unnormalized forward DFT, X[i] = sum_n x[n] exp(-j 2 pi i n / N).
///
/// Backed by FFTW. Plans are created once per size and shared; `forward` may be
/// called concurrently from any number of threads.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// `in` and `out` must both hold size() samples and must not alias.
    void forward(std::span<const Complex> in, std::span<Complex> out) const;

private:
    std::size_t n_;
    void* plan_;  // fftw_plan, owned by the process-wide cache
};

} // namespace cssplc
