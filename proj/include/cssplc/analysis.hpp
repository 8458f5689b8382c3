#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cssplc/params.hpp"

namespace cssplc {

/// Statistics of the noise-only correlator energies.
///
/// A single bin's noise energy |phi|^2 is exponential with mean `mu` and
/// variance `sigma2`; a superbin sums P of them (Gamma, treated as Gaussian):
///   S_noise ~ N(P mu, P sigma2),  running mean over Q ~ N(P mu, P sigma2 / Q).
struct NoiseModel {
    double mu = 1.0;
    double sigma2 = 1.0;
    std::size_t p = 1;
    std::size_t g_count = 2;
    std::size_t q = 1;

    /// Model for the pipeline at `snr_db`: with time-domain noise variance
    /// s2 = (Es / 2^sf) / 10^(snr/10), each bin has mu = s2 * Es and sigma2 = mu^2.
    static NoiseModel for_link(const CssParams& params, double snr_db);

    void validate() const;
    double superbin_mean() const noexcept { return static_cast<double>(p) * mu; }
    double superbin_variance() const noexcept { return static_cast<double>(p) * sigma2; }
    double enhanced_variance() const noexcept { return superbin_variance() / static_cast<double>(q); }
};

/// Energy of the transmitted symbol's correlator bin against the noise floor.
/// `es` is the received signal energy |y_signal|^2 summed over the superbin and
/// `n0` the single-bin noise energy (complex variance, so N0 / 2 per real
/// branch). k_shape = es / n0.
struct SignalBinModel {
    double es = 0.0;
    double n0 = 1.0;

    static SignalBinModel for_link(const CssParams& params, double snr_db);
    double k_shape() const noexcept { return es / n0; }
};

/// P mu + sqrt(2 ln(G - 1)) sqrt(P sigma2). Throws ParameterError for G < 2.
double expected_max_noise(const NoiseModel& model);

/// (mean(E) - mean(S_noise)) / sqrt(P sigma2 / Q) with mean(E) = P mu + es,
/// i.e. all dispersed symbol energy assumed to stay in its superbin.
double predict_separation(const NoiseModel& noise, const SignalBinModel& signal);

struct Histogram {
    double first_edge = 0.0;
    double bin_width = 0.0;
    std::vector<std::size_t> counts;
};

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased; 0 for a single sample
    double min = 0.0;
    double max = 0.0;
    double q05 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q95 = 0.0;
    Histogram histogram;
};

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
double quantile_sorted(std::span<const double> sorted, double q);

/// Mean, variance, quantiles and a Freedman-Diaconis histogram (bin width
/// 2 IQR n^(-1/3), at most 4096 bins, one bin when the IQR is zero).
/// Throws ParameterError on empty input.
SummaryStats histogram_stats(std::span<const double> samples);

/// Divides every value by `reference`, the convention used for energy plots
/// (reference = mean of the noise superbins).
std::vector<double> normalized(std::span<const double> values, double reference);

double mean_of(std::span<const double> v);
double variance_of(std::span<const double> v);

} // namespace cssplc
