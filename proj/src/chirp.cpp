#include "cssplc/chirp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cssplc/errors.hpp"

namespace cssplc {

namespace {

void require_symbol_length(const CssParams& params, std::size_t n) {
    if (n != params.chips()) {
        throw FramingError("expected one symbol of " + std::to_string(params.chips()) + " samples, got " +
                           std::to_string(n));
    }
}

// exp(j 2 pi num / 2M) with the phase numerator reduced exactly in integers,
// so large-SF symbols keep full precision.
Complex chirp_sample(std::int64_t m, std::int64_t n, std::int64_t k, double amplitude) {
    const std::int64_t two_m = 2 * m;
    std::int64_t num = (-n * n + m * n + 2 * k * n) % two_m;
    if (num < 0) num += two_m;
    const double phase = std::numbers::pi * static_cast<double>(num) / static_cast<double>(m);
    return std::polar(amplitude, phase);
}

} // namespace

ComplexSignal modulate(const CssParams& params, std::uint32_t k) {
    params.validate();
    const std::size_t m = params.chips();
    if (k >= m) {
        throw ParameterError("symbol " + std::to_string(k) + " outside [0, " + std::to_string(m) + ")");
    }
    const double amplitude = std::sqrt(params.symbol_energy / static_cast<double>(m));
    ComplexSignal out{std::vector<Complex>(m), params.bandwidth_hz};
    for (std::size_t n = 0; n < m; ++n) {
        out.samples[n] = chirp_sample(static_cast<std::int64_t>(m), static_cast<std::int64_t>(n), k, amplitude);
    }
    return out;
}

ComplexSignal modulate_superbin(const CssParams& params, std::uint32_t g) {
    params.validate();
    if (g >= params.superbin_count()) {
        throw ParameterError("superbin symbol " + std::to_string(g) + " outside [0, " +
                             std::to_string(params.superbin_count()) + ")");
    }
    return modulate(params, static_cast<std::uint32_t>(g * params.superbin_size));
}

ComplexSignal dechirp(const CssParams& params, const ComplexSignal& r) {
    params.validate();
    require_symbol_length(params, r.size());
    const ComplexSignal base = modulate(params, 0);
    ComplexSignal out{std::vector<Complex>(r.size()), r.sample_rate_hz};
    for (std::size_t n = 0; n < r.size(); ++n) out.samples[n] = r.samples[n] * std::conj(base.samples[n]);
    return out;
}

Spectrum demodulate_correlation(const CssParams& params, const ComplexSignal& r) {
    params.validate();
    require_symbol_length(params, r.size());
    const std::size_t m = params.chips();
    Spectrum y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const ComplexSignal basis = modulate(params, static_cast<std::uint32_t>(i));
        Complex acc{};
        for (std::size_t n = 0; n < m; ++n) acc += r.samples[n] * std::conj(basis.samples[n]);
        y[i] = acc;
    }
    return y;
}

Spectrum demodulate_fft(const CssParams& params, const ComplexSignal& r) {
    params.validate();
    require_symbol_length(params, r.size());
    return ChirpFrontEnd(params).spectrum(r.samples);
}

std::size_t argmax_magnitude(std::span<const Complex> y) {
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = std::norm(y[i]);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

ChirpFrontEnd::ChirpFrontEnd(const CssParams& params) : params_(params), fft_((params.validate(), params.chips())) {
    const ComplexSignal base = modulate(params_, 0);
    reference_.resize(base.size());
    for (std::size_t n = 0; n < base.size(); ++n) reference_[n] = std::conj(base.samples[n]);
}

void ChirpFrontEnd::spectrum(std::span<const Complex> r, std::span<Complex> scratch, std::span<Complex> out) const {
    require_symbol_length(params_, r.size());
    require_symbol_length(params_, scratch.size());
    for (std::size_t n = 0; n < r.size(); ++n) {
        const double a = r[n].real(), b = r[n].imag();
        const double c = reference_[n].real(), d = reference_[n].imag();
        scratch[n] = Complex{a * c - b * d, a * d + b * c};
    }
    fft_.forward(scratch, out);
}

Spectrum ChirpFrontEnd::spectrum(std::span<const Complex> r) const {
    std::vector<Complex> scratch(chips());
    Spectrum out(chips());
    spectrum(r, scratch, out);
    return out;
}

} // namespace cssplc
