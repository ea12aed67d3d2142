#include "kernelflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kernelflow/error.hpp"
#include "kernelflow/random.hpp"

namespace kernelflow {

Estimate mean_se(std::span<const double> x)
{
    const std::size_t n = x.size();
    require(n >= 2, Errc::invariant_violation, "need at least two samples");
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double var = ss / static_cast<double>(n - 1);
    return {m, std::sqrt(var / static_cast<double>(n)), n};
}

Estimate pair_mean_se(std::span<const double> x)
{
    require(x.size() % 2 == 0, Errc::invariant_violation, "antithetic samples come in pairs");
    std::vector<double> avg(x.size() / 2);
    for (std::size_t p = 0; p < avg.size(); ++p) avg[p] = 0.5 * (x[2 * p] + x[2 * p + 1]);
    auto e = mean_se(avg);
    e.n = x.size();
    return e;
}

Estimate weighted_mean_se(std::span<const double> x, std::span<const double> w)
{
    require(x.size() == w.size() && x.size() >= 2, Errc::invariant_violation, "weights must match samples");
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
    }
    require(sw > 0.0, Errc::degenerate_ess, "weights sum to zero");
    const double m = swx / sw;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = w[i] * (x[i] - m);
        s += r * r;
    }
    const double n = static_cast<double>(x.size());
    return {m, std::sqrt(s * n / (n - 1.0)) / sw, x.size()};
}

double variance(std::span<const double> x)
{
    const auto e = mean_se(x);
    return e.se * e.se * static_cast<double>(e.n);
}

Estimate variance_se(std::span<const double> x)
{
    const double n = static_cast<double>(x.size());
    require(x.size() >= 4, Errc::invariant_violation, "need at least four samples");
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    const double var = m2 * n / (n - 1.0);
    return {var, std::sqrt(std::max(m4 - m2 * m2, 0.0) / n), x.size()};
}

double bootstrap_se(std::span<const double> x, std::size_t resamples, std::uint64_t seed)
{
    const std::size_t n = x.size();
    require(n >= 2 && resamples >= 2, Errc::invariant_violation, "bootstrap needs data and resamples");
    std::mt19937_64 eng(stream_seed(seed, 0xb007));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[pick(eng)];
        m = s / static_cast<double>(n);
    }
    return std::sqrt(variance(means));
}

double effective_sample_size(std::span<const double> w)
{
    double s = 0.0, s2 = 0.0;
    for (double v : w) {
        s += v;
        s2 += v * v;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

double kolmogorov_q(double lambda)
{
    if (lambda < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

namespace {

struct Weighted {
    double x;
    double w;
};

std::vector<Weighted> normalised(std::span<const double> x, std::span<const double> w, double& n_eff)
{
    std::vector<Weighted> out(x.size());
    double sw = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        require(wi >= 0.0 && std::isfinite(wi), Errc::invariant_violation, "KS weights must be >= 0");
        out[i] = {x[i], wi};
        sw += wi;
    }
    require(sw > 0.0, Errc::degenerate_ess, "KS weights sum to zero");
    for (auto& e : out) e.w /= sw;
    std::sort(out.begin(), out.end(), [](const Weighted& a, const Weighted& b) { return a.x < b.x; });
    std::vector<double> ws(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) ws[i] = out[i].w;
    n_eff = effective_sample_size(ws);
    return out;
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                       std::span<const double> wb)
{
    require(!a.empty() && !b.empty(), Errc::invariant_violation, "KS needs two non-empty samples");
    double na = 0.0, nb = 0.0;
    const auto sa = normalised(a, wa, na);
    const auto sb = normalised(b, wb, nb);
    double fa = 0.0, fb = 0.0, d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
        double x;
        if (j >= sb.size() || (i < sa.size() && sa[i].x <= sb[j].x))
            x = sa[i].x;
        else
            x = sb[j].x;
        while (i < sa.size() && sa[i].x == x) fa += sa[i++].w;
        while (j < sb.size() && sb[j].x == x) fb += sb[j++].w;
        d = std::max(d, std::abs(fa - fb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    // Stephens' small-sample correction.
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_q(lambda), ne};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double lag1_autocorrelation(std::span<const double> x)
{
    const std::size_t n = x.size();
    require(n >= 3, Errc::invariant_violation, "need at least three observations");
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i + 1 < n) num += (x[i] - m) * (x[i + 1] - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace kernelflow
