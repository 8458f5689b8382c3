#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cssplc/fft.hpp"
#include "cssplc/params.hpp"
#include "cssplc/signal.hpp"

namespace cssplc {

// Symbol k is the base chirp cyclically delayed by k samples:
//
//   w_k[n] = sqrt(Es / M) * exp(j 2 pi (-n^2 / 2M + n / 2 + k n / M)),  M = 2^sf
//
// Its instantaneous frequency sweeps downwards through the band starting at
// the offset fixed by k. Dechirping with conj(w_0) leaves the tone
// (Es / M) exp(j 2 pi k n / M), so the unnormalized DFT of the dechirped
// symbol peaks at bin k with value exactly Es. Because a symbol is a delayed
// base chirp, a path arriving d samples late looks like symbol k + d: the
// multipath echo of symbol g*P lands in bins [g*P, g*P + d], inside its own
// superbin while d < P.
//
// The correlation bank y[i] = sum_n r[n] conj(w_i[n]) and the dechirp + DFT
// route are the same numbers: conj(w_i[n]) = conj(w_0[n]) exp(-j 2 pi i n / M)
// and dechirp() multiplies by conj(modulate(0)) including its amplitude, so the
// relating constant is 1 and the bin permutation is the identity.

/// Chirp for raw shift k in [0, 2^sf). Throws ParameterError for k out of range.
ComplexSignal modulate(const CssParams& params, std::uint32_t k);

/// Chirp for superbin symbol g in [0, G); identical to modulate(params, g * P).
ComplexSignal modulate_superbin(const CssParams& params, std::uint32_t g);

/// Elementwise product with conj(modulate(params, 0)). Throws FramingError unless
/// r holds exactly 2^sf samples.
ComplexSignal dechirp(const CssParams& params, const ComplexSignal& r);

/// Brute-force O(M^2) correlation against every basis chirp. Reference only.
Spectrum demodulate_correlation(const CssParams& params, const ComplexSignal& r);

/// DFT of dechirp(r). Same values as demodulate_correlation up to rounding.
Spectrum demodulate_fft(const CssParams& params, const ComplexSignal& r);

/// Index of the largest |y|; the lowest index wins ties.
std::size_t argmax_magnitude(std::span<const Complex> y);

/// Reusable dechirp + DFT front end holding the reference chirp and FFT plan.
/// Const methods are safe to call concurrently given distinct output buffers.
class ChirpFrontEnd {
public:
    explicit ChirpFrontEnd(const CssParams& params);

    const CssParams& params() const noexcept { return params_; }
    std::size_t chips() const noexcept { return reference_.size(); }

    /// `scratch` and `out` must hold chips() samples.
    void spectrum(std::span<const Complex> r, std::span<Complex> scratch, std::span<Complex> out) const;
    Spectrum spectrum(std::span<const Complex> r) const;

private:
    CssParams params_;
    std::vector<Complex> reference_;  // conj(w_0)
    Fft fft_;
};

} // namespace cssplc
