#include "cssplc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "cssplc/errors.hpp"

namespace cssplc {

namespace {

static_assert(sizeof(Complex) == sizeof(fftw_complex));

// fftw planning is not thread safe; execution with the new-array interface is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan plan_for(std::size_t n) {
    static std::map<std::size_t, fftw_plan> cache;
    std::lock_guard lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<Complex> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw Error("fftw could not plan a transform of size " + std::to_string(n));
    cache.emplace(n, p);
    return p;
}

} // namespace

Fft::Fft(std::size_t n) : n_(n), plan_(nullptr) {
    if (n == 0) throw ParameterError("FFT size must be positive");
    plan_ = plan_for(n);
}

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n_ || out.size() != n_) {
        throw FramingError("FFT of size " + std::to_string(n_) + " given buffers of " +
                           std::to_string(in.size()) + " / " + std::to_string(out.size()) + " samples");
    }
    // Out-of-place complex transforms preserve their input.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
    fftw_execute_dft(static_cast<fftw_plan>(plan_), src, reinterpret_cast<fftw_complex*>(out.data()));
}

} // namespace cssplc
