#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kernelflow {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Sample mean and its standard error (n - 1 denominator).
Estimate mean_se(std::span<const double> x);
/// Mean over antithetic pairs (x[2p], x[2p+1]); the SE is computed from the pair averages.
Estimate pair_mean_se(std::span<const double> x);
/// Self-normalised weighted mean; SE by the delta method.
Estimate weighted_mean_se(std::span<const double> x, std::span<const double> w);

double variance(std::span<const double> x);

/// Variance estimate with its standard error (fourth-moment formula).
Estimate variance_se(std::span<const double> x);

/// Standard error of the mean by resampling, with a fixed seed.
double bootstrap_se(std::span<const double> x, std::size_t resamples, std::uint64_t seed);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> w);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double n_eff = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test on weighted samples (empty weights mean
/// equal weights). Asymptotic p-value with effective sizes n_a n_b / (n_a + n_b).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                       std::span<const double> wb);

/// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

double normal_cdf(double x);

/// Lag-1 autocorrelation of one series.
double lag1_autocorrelation(std::span<const double> x);

}  // namespace kernelflow
