#include "cssplc/signal.hpp"

#include <algorithm>
#include <cmath>

namespace cssplc {

double energy(std::span<const Complex> x) noexcept {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

double ComplexSignal::energy() const noexcept { return cssplc::energy(samples); }

double ComplexSignal::mean_power() const noexcept {
    return samples.empty() ? 0.0 : energy() / static_cast<double>(samples.size());
}

bool ComplexSignal::all_finite() const noexcept {
    return std::all_of(samples.begin(), samples.end(),
                       [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

} // namespace cssplc
