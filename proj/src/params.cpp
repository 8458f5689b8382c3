#include "cssplc/params.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "cssplc/errors.hpp"

namespace cssplc {

void CssParams::validate() const {
    if (sf < kMinSpreadingFactor || sf > kMaxSpreadingFactor) {
        throw ParameterError("spreading factor " + std::to_string(sf) + " outside [7, 14]");
    }
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
        throw ParameterError("bandwidth must be a positive finite value");
    }
    if (!is_power_of_two(superbin_size)) {
        throw ParameterError("superbin size " + std::to_string(superbin_size) + " is not a power of two");
    }
    if (superbin_size > chips()) {
        throw ParameterError("superbin size " + std::to_string(superbin_size) + " exceeds 2^sf = " +
                             std::to_string(chips()));
    }
    if (averaging_depth < 1) {
        throw ParameterError("averaging depth must be at least 1");
    }
    if (!(symbol_energy > 0.0) || !std::isfinite(symbol_energy)) {
        throw ParameterError("symbol energy must be a positive finite value");
    }
}

int CssParams::bits_per_symbol() const noexcept {
    return sf - std::countr_zero(superbin_size);
}

} // namespace cssplc
