#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nearfar {

// q*(x_n) = |f(x_n)| / Σ|f(x_i)|. Throws NumericError when every loss is zero.
std::vector<double> normalized_weights(std::span<const double> losses);

// g = (f - mean) / std with the population standard deviation. Throws
// NumericError for fewer than two values or constant input.
std::vector<double> standardize(std::span<const double> losses);

// s_i = min(1, M·w_i / Σw) for nonnegative weights, 1 <= M <= N.
std::vector<double> clipped_probabilities(std::span<const double> weights, std::int64_t m);

// R = Σw² / Σ(w²/s_i), the two algebraic routes below cross-checked to 1e-9.
// Zero-weight items contribute nothing to either sum.
double relative_variance(std::span<const double> weights, std::int64_t m);
double relative_variance_direct(std::span<const double> weights, std::int64_t m);
// Saturated items contribute w², unsaturated ones (Σw/M)·w.
double relative_variance_split(std::span<const double> weights, std::int64_t m);

struct EfficiencyPoint {
    double fraction = 0.0;
    std::int64_t m = 0;
    double r = 0.0;
};

// R over a grid of sampling fractions, computed on standardized losses.
// M = round(fraction·N); fraction 1 means the full sample and R = 1 exactly.
std::vector<EfficiencyPoint> efficiency_curve(std::span<const double> losses,
                                              std::span<const double> fractions);

// Independent Bernoulli keep per item ("Poisson sampling"). Returns kept
// indices, ascending.
std::vector<std::size_t> draw_sample_bernoulli(std::span<const double> probabilities,
                                               std::uint64_t seed);

// M draws with replacement from the normalized weights; returns the distinct
// drawn indices, ascending.
std::vector<std::size_t> draw_sample_multinomial(std::span<const double> weights, std::int64_t m,
                                                 std::uint64_t seed);

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> trial_values;  // one estimator value per trial
};

// Empirical behavior of the importance-sampling estimator of E_p[f] with p
// uniform: each trial draws `draws_per_trial` items from q and averages
// f·p/q. Requires q_i > 0 wherever f_i ≠ 0.
McEstimate estimator_variance_mc(std::span<const double> f, std::span<const double> q,
                                 std::int64_t trials, std::int64_t draws_per_trial,
                                 std::uint64_t seed);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r = 0.0;
    std::int64_t n = 0;
};

// Ordinary least squares y on x plus the Pearson correlation; a constant y
// yields slope 0 and r = 0 by convention.
FitResult paired_series_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace nearfar
