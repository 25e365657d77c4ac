#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nearfar/errors.hpp"
#include "nearfar/rng.hpp"
#include "nearfar/sampler.hpp"

using namespace nearfar;

TEST_CASE("normalized_weights hand examples") {
    const std::vector<double> a = normalized_weights(std::vector<double>{1.0, 3.0});
    CHECK(a[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(0.75).epsilon(1e-12));

    const std::vector<double> b = normalized_weights(std::vector<double>{2.0, 2.0, 2.0, 2.0});
    for (const double v : b) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

    const std::vector<double> c = normalized_weights(std::vector<double>{0.0, 5.0});
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 1.0);

    CHECK_THROWS_AS(normalized_weights(std::vector<double>{0.0, 0.0}), NumericError);
}

TEST_CASE("normalized_weights is a scale-invariant probability vector") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> losses(1 + rng.below(50));
        for (auto& v : losses) v = rng.uniform01() < 0.2 ? 0.0 : 10.0 * rng.uniform01();
        losses[0] = 1.0 + rng.uniform01();  // at least one positive
        const std::vector<double> q = normalized_weights(losses);

        double total = 0.0;
        for (const double v : q) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::fabs(total - 1.0) < 1e-9);

        std::vector<double> scaled = losses;
        for (auto& v : scaled) v *= 7.25;
        const std::vector<double> q2 = normalized_weights(scaled);
        for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::fabs(q[i] - q2[i]) < 1e-12);
    }
}

TEST_CASE("standardize hand examples and properties") {
    const std::vector<double> g = standardize(std::vector<double>{0.0, 2.0});
    CHECK(g[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(standardize(std::vector<double>{5.0}), std::invalid_argument);
    CHECK_THROWS_AS(standardize(std::vector<double>{3.0, 3.0, 3.0}), NumericError);

    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> losses(2 + rng.below(100));
        for (auto& v : losses) v = 5.0 * rng.gaussian();
        losses[0] += 1.0;  // avoid the degenerate constant case
        const std::vector<double> z = standardize(losses);

        double mean = 0.0;
        for (const double v : z) mean += v;
        mean /= static_cast<double>(z.size());
        double var = 0.0;
        for (const double v : z) var += (v - mean) * (v - mean);
        var /= static_cast<double>(z.size());
        CHECK(std::fabs(mean) < 1e-12);
        CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-12);

        // Affine invariance: standardize(a·f + b) = sign(a)·standardize(f).
        std::vector<double> affine = losses;
        for (auto& v : affine) v = -2.5 * v + 3.0;
        const std::vector<double> za = standardize(affine);
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::fabs(za[i] + z[i]) < 1e-9);
    }
}

TEST_CASE("clipped_probabilities hand examples") {
    const std::vector<double> a = clipped_probabilities(std::vector<double>{1.0, 1.0, 8.0}, 2);
    CHECK(a[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(a[2] == 1.0);

    const std::vector<double> b = clipped_probabilities(std::vector<double>{3.0, 3.0, 3.0}, 3);
    for (const double v : b) CHECK(v == 1.0);

    const std::vector<double> c = clipped_probabilities(std::vector<double>{1.0, 1.0}, 1);
    CHECK(c[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(clipped_probabilities(std::vector<double>{1.0, 1.0}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(clipped_probabilities(std::vector<double>{1.0, 1.0}, 3),
                    std::invalid_argument);
}

TEST_CASE("relative_variance hand examples") {
    const std::vector<double> w{1.0, 1.0, 2.0};
    CHECK(relative_variance(w, 2) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(relative_variance(w, 3) == doctest::Approx(0.9).epsilon(1e-12));
    // Uniform weights at M = N saturate every probability.
    CHECK(relative_variance(std::vector<double>{2.0, 2.0}, 2) == 1.0);
}

TEST_CASE("direct and split formulas agree on random weight vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> w(2 + rng.below(200));
        for (auto& v : w) {
            v = rng.uniform01() < 0.1 ? 0.0 : std::fabs(rng.gaussian());
        }
        w[0] = 1.0;
        const auto m = static_cast<std::int64_t>(1 + rng.below(w.size()));
        const double direct = relative_variance_direct(w, m);
        const double split = relative_variance_split(w, m);
        CHECK(std::fabs(direct - split) < 1e-9);
        CHECK(direct <= 1.0 + 1e-12);
        CHECK(direct > 0.0);
        CHECK_NOTHROW(relative_variance(w, m));
    }
}

TEST_CASE("efficiency curve is monotone and ends at exactly 1") {
    Rng rng(99);
    std::vector<double> losses(2000);
    for (auto& v : losses) v = rng.exponential();

    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);

    const auto curve = efficiency_curve(losses, grid);
    REQUIRE(curve.size() == 20);
    double prev = 0.0;
    for (const auto& point : curve) {
        CHECK(point.r >= prev - 1e-12);
        CHECK(point.r > 0.0);
        CHECK(point.r <= 1.0);
        prev = point.r;
    }
    CHECK(curve.back().fraction == 1.0);
    CHECK(curve.back().m == 2000);
    CHECK(curve.back().r == 1.0);

    CHECK_THROWS_AS(efficiency_curve(losses, std::vector<double>{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(efficiency_curve(losses, std::vector<double>{1.5}), std::invalid_argument);
}

TEST_CASE("bernoulli draw edge cases and concentration") {
    const std::vector<double> all_one(100, 1.0);
    CHECK(draw_sample_bernoulli(all_one, 5).size() == 100);
    const std::vector<double> all_zero(100, 0.0);
    CHECK(draw_sample_bernoulli(all_zero, 5).empty());

    // Mean realized size over many seeds concentrates around Σs.
    std::vector<double> s(200);
    Rng rng(17);
    for (auto& v : s) v = rng.uniform01();
    double expected = std::accumulate(s.begin(), s.end(), 0.0);
    double spread = 0.0;
    for (const double v : s) spread += v * (1.0 - v);

    double mean_size = 0.0;
    const int seeds = 10000;
    for (int seed = 0; seed < seeds; ++seed) {
        mean_size += static_cast<double>(
            draw_sample_bernoulli(s, static_cast<std::uint64_t>(seed)).size());
    }
    mean_size /= seeds;
    CHECK(std::fabs(mean_size - expected) < 3.0 * std::sqrt(spread));
}

TEST_CASE("draws are deterministic per seed") {
    std::vector<double> s(50);
    Rng rng(5);
    for (auto& v : s) v = rng.uniform01();
    CHECK(draw_sample_bernoulli(s, 77) == draw_sample_bernoulli(s, 77));
    CHECK(draw_sample_multinomial(s, 20, 77) == draw_sample_multinomial(s, 20, 77));
}

TEST_CASE("multinomial draw returns distinct indices weighted by loss") {
    const std::vector<double> w{0.0, 1.0, 0.0, 1.0};
    const auto kept = draw_sample_multinomial(w, 4, 3);
    for (const std::size_t i : kept) {
        CHECK((i == 1 || i == 3));  // zero-weight items can never be drawn
    }
    CHECK(!kept.empty());
    CHECK(std::is_sorted(kept.begin(), kept.end()));
}

TEST_CASE("importance-sampling estimator: constant f has zero variance") {
    const std::vector<double> f(64, 3.5);
    const std::vector<double> q = normalized_weights(f);
    const McEstimate est = estimator_variance_mc(f, q, 2000, 8, 11);
    CHECK(est.variance == 0.0);
    CHECK(est.mean == doctest::Approx(3.5).epsilon(1e-12));
}

namespace {

// Percentile bootstrap interval for the variance of the trial values.
std::pair<double, double> variance_ci(const std::vector<double>& values, std::uint64_t seed) {
    const std::size_t n = values.size();
    std::vector<double> vars;
    Rng rng(seed);
    for (int b = 0; b < 200; ++b) {
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = values[rng.below(n)];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / static_cast<double>(n);
        vars.push_back(std::max(0.0, sumsq / static_cast<double>(n) - mean * mean));
    }
    std::sort(vars.begin(), vars.end());
    return {vars[1], vars[198]};
}

}  // namespace

TEST_CASE("optimal proposal beats uniform on a heavy-tailed instance") {
    std::vector<double> f(100, 1.0);
    f[99] = 100.0;
    const double true_mean = std::accumulate(f.begin(), f.end(), 0.0) / 100.0;

    const std::vector<double> q_star = normalized_weights(f);
    const std::vector<double> uniform(100, 0.01);

    const std::int64_t trials = 100000;
    const McEstimate opt = estimator_variance_mc(f, q_star, trials, 10, 21);
    const McEstimate uni = estimator_variance_mc(f, uniform, trials, 10, 22);

    CHECK(opt.variance < uni.variance);
    // The 99% bootstrap intervals of the two variances must not overlap.
    const auto [opt_lo, opt_hi] = variance_ci(opt.trial_values, 31);
    const auto [uni_lo, uni_hi] = variance_ci(uni.trial_values, 32);
    (void)opt_lo;
    (void)uni_hi;
    CHECK(opt_hi < uni_lo);

    // Unbiasedness: both means within 3 standard errors of the true mean.
    const double se_opt = std::sqrt(opt.variance / static_cast<double>(trials));
    const double se_uni = std::sqrt(uni.variance / static_cast<double>(trials));
    CHECK(std::fabs(opt.mean - true_mean) <= 3.0 * se_opt + 1e-9);
    CHECK(std::fabs(uni.mean - true_mean) <= 3.0 * se_uni + 1e-9);
}

TEST_CASE("estimator_variance_mc rejects proposals that miss the support") {
    const std::vector<double> f{1.0, 2.0};
    const std::vector<double> q{1.0, 0.0};
    CHECK_THROWS_AS(estimator_variance_mc(f, q, 10, 2, 1), std::invalid_argument);
}

TEST_CASE("paired_series_fit hand examples") {
    SUBCASE("exact linearity") {
        const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
        std::vector<double> y;
        for (const double v : x) y.push_back(2.0 * v);
        const FitResult fit = paired_series_fit(x, y);
        CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fit.r == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("constant y gives slope 0 and r = 0 by convention") {
        const FitResult fit =
            paired_series_fit(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{5.0, 5.0, 5.0});
        CHECK(fit.slope == 0.0);
        CHECK(fit.r == 0.0);
    }

    SUBCASE("three-point closed form") {
        const FitResult fit =
            paired_series_fit(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1.0, 3.0, 2.0});
        CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.r == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fit.n == 3);
    }

    SUBCASE("degenerate x is rejected") {
        CHECK_THROWS_AS(paired_series_fit(std::vector<double>{2.0, 2.0, 2.0},
                                          std::vector<double>{1.0, 2.0, 3.0}),
                        NumericError);
        CHECK_THROWS_AS(
            paired_series_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}),
            std::invalid_argument);
    }
}
