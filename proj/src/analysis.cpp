#include "cssplc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cssplc/channel.hpp"
#include "cssplc/errors.hpp"

namespace cssplc {

NoiseModel NoiseModel::for_link(const CssParams& params, double snr_db) {
    params.validate();
    const double es = params.symbol_energy;
    const double time_variance = noise_variance(es / static_cast<double>(params.chips()), snr_db);
    NoiseModel m;
    m.mu = time_variance * es;
    m.sigma2 = m.mu * m.mu;
    m.p = params.superbin_size;
    m.g_count = params.superbin_count();
    m.q = params.averaging_depth;
    return m;
}

void NoiseModel::validate() const {
    if (!(mu > 0.0) || !(sigma2 > 0.0)) throw ParameterError("noise model needs positive mu and sigma2");
    if (p < 1 || q < 1) throw ParameterError("noise model needs P >= 1 and Q >= 1");
}

SignalBinModel SignalBinModel::for_link(const CssParams& params, double snr_db) {
    const NoiseModel noise = NoiseModel::for_link(params, snr_db);
    return SignalBinModel{params.symbol_energy * params.symbol_energy, noise.mu};
}

double expected_max_noise(const NoiseModel& model) {
    model.validate();
    if (model.g_count < 2) {
        throw ParameterError("expected maximum needs at least two superbins, got " + std::to_string(model.g_count));
    }
    const double others = static_cast<double>(model.g_count - 1);
    return model.superbin_mean() + std::sqrt(2.0 * std::log(others)) * std::sqrt(model.superbin_variance());
}

double predict_separation(const NoiseModel& noise, const SignalBinModel& signal) {
    noise.validate();
    if (signal.es < 0.0) throw ParameterError("signal energy must be non-negative");
    const double mean_signal = noise.superbin_mean() + signal.es;
    return (mean_signal - noise.superbin_mean()) / std::sqrt(noise.enhanced_variance());
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ParameterError("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> v) {
    if (v.empty()) throw ParameterError("mean of an empty sample");
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

SummaryStats histogram_stats(std::span<const double> samples) {
    if (samples.empty()) throw ParameterError("histogram of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    SummaryStats st;
    st.count = sorted.size();
    st.mean = mean_of(sorted);
    st.variance = variance_of(sorted);
    st.min = sorted.front();
    st.max = sorted.back();
    st.q05 = quantile_sorted(sorted, 0.05);
    st.q25 = quantile_sorted(sorted, 0.25);
    st.median = quantile_sorted(sorted, 0.5);
    st.q75 = quantile_sorted(sorted, 0.75);
    st.q95 = quantile_sorted(sorted, 0.95);

    constexpr std::size_t kMaxBins = 4096;
    const double iqr = st.q75 - st.q25;
    const double range = st.max - st.min;
    std::size_t bins = 1;
    double width = range > 0.0 ? range : 1.0;
    if (iqr > 0.0 && range > 0.0) {
        const double fd = 2.0 * iqr / std::cbrt(static_cast<double>(st.count));
        bins = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(range / fd)), 1, kMaxBins);
        width = range / static_cast<double>(bins);
    }
    st.histogram.first_edge = st.min;
    st.histogram.bin_width = width;
    st.histogram.counts.assign(bins, 0);
    for (double x : sorted) {
        auto idx = static_cast<std::size_t>((x - st.min) / width);
        st.histogram.counts[std::min(idx, bins - 1)]++;
    }
    return st;
}

std::vector<double> normalized(std::span<const double> values, double reference) {
    if (!(reference > 0.0)) throw ParameterError("normalization reference must be positive");
    std::vector<double> out(values.begin(), values.end());
    for (auto& v : out) v /= reference;
    return out;
}

} // namespace cssplc
