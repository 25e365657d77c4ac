#include "nearfar/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nearfar/errors.hpp"
#include "nearfar/rng.hpp"

namespace nearfar {

namespace {

void check_finite_nonneg(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
        if (v < 0.0) throw std::invalid_argument(std::string(what) + ": negative value");
    }
}

void check_m_range(std::int64_t m, std::size_t n) {
    if (m < 1 || static_cast<std::size_t>(m) > n) {
        throw std::invalid_argument("M must lie in [1, N]");
    }
}

double abs_sum(std::span<const double> values) {
    double total = 0.0;
    for (double v : values) total += std::fabs(v);
    return total;
}

}  // namespace

std::vector<double> normalized_weights(std::span<const double> losses) {
    if (losses.empty()) throw std::invalid_argument("normalized_weights: empty input");
    for (double v : losses) {
        if (!std::isfinite(v)) throw std::invalid_argument("normalized_weights: non-finite loss");
    }
    const double total = abs_sum(losses);
    if (total <= 0.0) throw NumericError("normalized_weights: all losses are zero");
    std::vector<double> q(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) q[i] = std::fabs(losses[i]) / total;
    return q;
}

std::vector<double> standardize(std::span<const double> losses) {
    const std::size_t n = losses.size();
    if (n < 2) throw std::invalid_argument("standardize: need at least two values");
    double mean = 0.0;
    for (double v : losses) {
        if (!std::isfinite(v)) throw std::invalid_argument("standardize: non-finite loss");
        mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : losses) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var <= 0.0) throw NumericError("standardize: constant losses have no spread");
    const double std_dev = std::sqrt(var);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (losses[i] - mean) / std_dev;
    return g;
}

std::vector<double> clipped_probabilities(std::span<const double> weights, std::int64_t m) {
    check_finite_nonneg(weights, "clipped_probabilities");
    check_m_range(m, weights.size());
    const double total = abs_sum(weights);
    if (total <= 0.0) throw NumericError("clipped_probabilities: all weights are zero");
    std::vector<double> s(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        s[i] = std::min(1.0, static_cast<double>(m) * weights[i] / total);
    }
    return s;
}

double relative_variance_direct(std::span<const double> weights, std::int64_t m) {
    const std::vector<double> s = clipped_probabilities(weights, m);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        num += weights[i] * weights[i];
        den += weights[i] * weights[i] / s[i];
    }
    return num / den;
}

double relative_variance_split(std::span<const double> weights, std::int64_t m) {
    check_finite_nonneg(weights, "relative_variance");
    check_m_range(m, weights.size());
    const double total = abs_sum(weights);
    if (total <= 0.0) throw NumericError("relative_variance: all weights are zero");

    const double scale = total / static_cast<double>(m);
    double num = 0.0;
    double den = 0.0;
    for (const double w : weights) {
        if (w == 0.0) continue;
        num += w * w;
        if (static_cast<double>(m) * w / total < 1.0) {
            den += scale * w;  // unsaturated
        } else {
            den += w * w;  // saturated, sampled with certainty
        }
    }
    return num / den;
}

double relative_variance(std::span<const double> weights, std::int64_t m) {
    const double direct = relative_variance_direct(weights, m);
    const double split = relative_variance_split(weights, m);
    if (std::fabs(direct - split) > 1e-9) {
        throw NumericError("relative_variance: direct and split routes disagree");
    }
    return direct;
}

std::vector<EfficiencyPoint> efficiency_curve(std::span<const double> losses,
                                              std::span<const double> fractions) {
    const std::vector<double> g = standardize(losses);
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::fabs(g[i]);

    const auto n = static_cast<std::int64_t>(losses.size());
    std::vector<EfficiencyPoint> curve;
    curve.reserve(fractions.size());
    for (double f : fractions) {
        if (!(f > 0.0) || f > 1.0 + 1e-9) {
            throw std::invalid_argument("efficiency_curve: fractions must lie in (0, 1]");
        }
        f = std::min(f, 1.0);
        std::int64_t m = std::llround(f * static_cast<double>(n));
        m = std::clamp<std::int64_t>(m, 1, n);
        // Full sample: everything is kept, no variance is lost.
        const double r = m >= n ? 1.0 : relative_variance(w, m);
        curve.push_back(EfficiencyPoint{f, m, r});
    }
    return curve;
}

std::vector<std::size_t> draw_sample_bernoulli(std::span<const double> probabilities,
                                               std::uint64_t seed) {
    for (double p : probabilities) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw std::invalid_argument("draw_sample: probabilities must lie in [0, 1]");
        }
    }
    Rng rng(seed);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (rng.uniform01() < probabilities[i]) kept.push_back(i);
    }
    return kept;
}

std::vector<std::size_t> draw_sample_multinomial(std::span<const double> weights, std::int64_t m,
                                                 std::uint64_t seed) {
    const std::vector<double> q = normalized_weights(weights);
    check_m_range(m, q.size());
    std::vector<double> cdf(q.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        acc += q[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    Rng rng(seed);
    std::vector<char> kept(q.size(), 0);
    for (std::int64_t d = 0; d < m; ++d) {
        const double u = rng.uniform01();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        kept[static_cast<std::size_t>(it - cdf.begin())] = 1;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i]) out.push_back(i);
    }
    return out;
}

McEstimate estimator_variance_mc(std::span<const double> f, std::span<const double> q,
                                 std::int64_t trials, std::int64_t draws_per_trial,
                                 std::uint64_t seed) {
    const std::size_t n = f.size();
    if (n == 0 || q.size() != n) {
        throw std::invalid_argument("estimator_variance_mc: f and q must be non-empty and equal");
    }
    if (trials < 1 || draws_per_trial < 1) {
        throw std::invalid_argument("estimator_variance_mc: trials and draws must be >= 1");
    }
    double q_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(q[i]) || q[i] < 0.0) {
            throw std::invalid_argument("estimator_variance_mc: invalid proposal");
        }
        if (f[i] != 0.0 && q[i] <= 0.0) {
            throw std::invalid_argument("estimator_variance_mc: q must cover the support of f");
        }
        q_total += q[i];
    }
    if (q_total <= 0.0) throw std::invalid_argument("estimator_variance_mc: zero proposal mass");

    std::vector<double> cdf(n);
    std::vector<double> term(n);  // f·p/q for each item, p uniform
    const double p = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += q[i] / q_total;
        cdf[i] = acc;
        term[i] = q[i] > 0.0 ? f[i] * p / (q[i] / q_total) : 0.0;
    }
    cdf.back() = 1.0;

    McEstimate est;
    est.trial_values.resize(static_cast<std::size_t>(trials));
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed({seed, 0x7261115ULL, static_cast<std::uint64_t>(t)}));
        double sum = 0.0;
        for (std::int64_t d = 0; d < draws_per_trial; ++d) {
            const double u = rng.uniform01();
            const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            sum += term[static_cast<std::size_t>(it - cdf.begin())];
        }
        est.trial_values[static_cast<std::size_t>(t)] = sum / static_cast<double>(draws_per_trial);
    }

    double mean = 0.0;
    for (double v : est.trial_values) mean += v;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (double v : est.trial_values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(trials);
    est.mean = mean;
    est.variance = var;
    return est;
}

FitResult paired_series_fit(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 3 || ys.size() != n) {
        throw std::invalid_argument("paired_series_fit: need equal-length series of >= 3 points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw std::invalid_argument("paired_series_fit: non-finite input");
        }
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw NumericError("paired_series_fit: x has no variance");

    FitResult fit;
    fit.n = static_cast<std::int64_t>(n);
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r = syy <= 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
    return fit;
}

}  // namespace nearfar
