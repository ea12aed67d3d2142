#include "kernelflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fmt/format.h>

#include "kernelflow/error.hpp"
#include "kernelflow/parallel.hpp"
#include "kernelflow/pricing.hpp"

namespace kernelflow {

ParticleCloud particle_cloud(const StructureFunction& v, const InitialDensity& d, const InformationPath& path,
                             double t, std::size_t count, std::uint64_t seed)
{
    require(count >= 1, Errc::invariant_violation, "particle count must be positive");
    require(v.deterministic(), Errc::not_applicable, "particle oracle needs a deterministic structure function");
    const auto& grid = path.xi.grid();
    const std::size_t K = grid.index_of(t), dim = v.dim();
    ParticleCloud c;
    c.particles.resize(count);
    c.log_weights.assign(count, 0.0);
    RandomStream rng(seed, 0x9a47);
    for (std::size_t i = 0; i < count; ++i)
        c.particles[i] = d.quantile((static_cast<double>(i) + rng.uniform()) / static_cast<double>(count));
    const bool fixed = v.time_independent();
    Vec s(dim);
    for (std::size_t i = 0; i < count; ++i) {
        double lw = 0.0;
        if (fixed) v.eval_into(0.0, c.particles[i], {}, s);
        for (std::size_t k = 0; k < K; ++k) {
            if (!fixed) v.eval_into(grid.time(k), c.particles[i], {}, s);
            lw += dot(s, path.xi.increment(k)) - 0.5 * norm2(s) * grid.dt;
        }
        c.log_weights[i] = lw;
    }
    const double m = *std::max_element(c.log_weights.begin(), c.log_weights.end());
    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) w[i] = std::exp(c.log_weights[i] - m);
    c.ess = effective_sample_size(w);
    return c;
}

ParticleEstimate particle_posterior(const StructureFunction& v, const InitialDensity& d,
                                    const InformationPath& path, double t, std::size_t count, std::uint64_t seed,
                                    double bandwidth)
{
    const auto cloud = particle_cloud(v, d, path, t, count, seed);
    if (cloud.ess < 100.0)
        raise(Errc::degenerate_ess, fmt::format("effective sample size {:.1f} < 100", cloud.ess));
    const auto& q = d.quadrature();
    const auto& u = q.nodes();
    const std::size_t n = u.size();
    const double h = bandwidth > 0.0 ? bandwidth : 2.0 * u[1];

    // Linear binning of the weights onto the nodes.
    const double m = *std::max_element(cloud.log_weights.begin(), cloud.log_weights.end());
    std::vector<double> mass(n, 0.0);
    for (std::size_t i = 0; i < cloud.count(); ++i) {
        const double w = std::exp(cloud.log_weights[i] - m);
        const auto [k, f] = q.locate(cloud.particles[i]);
        mass[k] += w * (1.0 - f);
        mass[k + 1] += w * f;
    }
    // Gaussian smoothing with reflection at 0.
    std::vector<double> rho(n, 0.0);
    const double norm_k = 1.0 / (h * std::sqrt(2.0 * M_PI));
    const double reach = 6.0 * h;
    for (std::size_t j = 0; j < n; ++j) {
        const auto lo = std::lower_bound(u.begin(), u.end(), u[j] - reach) - u.begin();
        const auto hi = std::upper_bound(u.begin(), u.end(), u[j] + reach) - u.begin();
        double s = 0.0;
        for (auto i = lo; i < hi; ++i) {
            const double z = (u[j] - u[i]) / h;
            s += mass[i] * std::exp(-0.5 * z * z);
        }
        for (std::size_t i = 0; i < n && u[i] <= reach - u[j]; ++i) {
            const double z = (u[j] + u[i]) / h;
            s += mass[i] * std::exp(-0.5 * z * z);
        }
        rho[j] = s * norm_k;
    }
    const double z = q.integrate(rho);
    require(z > 0.0, Errc::numerical_underflow, "particle density has no mass");
    for (auto& x : rho) x /= z;
    return {std::move(rho), cloud.ess};
}

bool MartingaleCheck::pass(double bound) const
{
    return std::all_of(z.begin(), z.end(), [&](double x) { return std::abs(x) < bound; });
}

MartingaleCheck mc_martingale_test(const std::function<void(std::size_t, std::span<double>)>& sampler,
                                   std::size_t checkpoints, std::size_t n_paths, std::size_t threads, bool paired)
{
    require(n_paths >= 2, Errc::invariant_violation, "need at least 2 paths");
    std::vector<double> all(n_paths * checkpoints);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        sampler(i, std::span<double>(all.data() + i * checkpoints, checkpoints));
    });
    MartingaleCheck out;
    std::vector<double> col(n_paths);
    for (std::size_t c = 0; c < checkpoints; ++c) {
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = all[i * checkpoints + c];
        const auto e = paired ? pair_mean_se(col) : mean_se(col);
        out.estimates.push_back(e);
        const double gap = e.mean - 1.0;
        out.z.push_back(e.se > 0.0 ? gap / e.se : (gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap)));
    }
    return out;
}

IndependenceReport independence_test(std::span<const double> X, std::span<const double> xi,
                                     std::span<const double> weights)
{
    const std::size_t n = X.size();
    require(n >= 2 && xi.size() == n, Errc::dimension_mismatch, "paired samples of equal length required");
    require(weights.empty() || weights.size() == n, Errc::dimension_mismatch, "one weight per sample");
    std::vector<double> w(n, 1.0);
    if (!weights.empty()) std::copy(weights.begin(), weights.end(), w.begin());
    double sw = 0.0;
    for (double x : w) sw += x;
    require(sw > 0.0, Errc::degenerate_ess, "weights sum to zero");
    for (auto& x : w) x /= sw;

    auto standardise = [&](std::span<const double> a) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += w[i] * a[i];
        for (std::size_t i = 0; i < n; ++i) v += w[i] * (a[i] - m) * (a[i] - m);
        const double s = v > 0.0 ? std::sqrt(v) : 1.0;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = (a[i] - m) / s;
        return out;
    };
    const auto a = standardise(X);
    const auto b = standardise(xi);

    IndependenceReport r;
    for (std::size_t i = 0; i < n; ++i) r.correlation += w[i] * a[i] * b[i];
    r.n_eff = effective_sample_size(w);
    r.threshold = 5.0 / std::sqrt(r.n_eff);
    const double grid[] = {-2.0, -1.0, 1.0, 2.0};
    auto cf = [&](double x, double y) {
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * std::polar(1.0, x * a[i] + y * b[i]);
        return s;
    };
    for (double x : grid)
        for (double y : grid) r.max_gap = std::max(r.max_gap, std::abs(cf(x, y) - cf(x, 0.0) * cf(0.0, y)));
    r.pass = r.max_gap < r.threshold;
    return r;
}

double two_point_log_odds(const StructureFunction& v, double a, double b, const InformationPath& path, double t)
{
    const auto& grid = path.xi.grid();
    const std::size_t K = grid.index_of(t);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double tk = grid.time(k);
        const Vec va = v.eval(tk, a), vb = v.eval(tk, b);
        const Vec dv = va - vb;
        s += dot(dv, path.xi.increment(k)) - 0.5 * (norm2(va) - norm2(vb)) * grid.dt;
    }
    return s;
}

double riemann_integral(const std::function<double(double)>& f, double a, double b, std::size_t n)
{
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
    return s * h;
}

BondDriftRegression bond_drift_regression(std::shared_ptr<const FilterModel> model, const TimeGrid& grid,
                                          double maturity, double t_end, const McOptions& mc)
{
    require(mc.n_paths >= 2, Errc::invariant_violation, "need at least 2 paths");
    require(maturity > t_end, Errc::invariant_violation, "bond must outlive the regression window");
    const std::size_t K = grid.index_of(t_end);
    const MarketModel market{model, {}, grid};
    std::vector<double> realized(mc.n_paths), analytic(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
        const auto info = simulate_brownian(grid, model->dim(), mc.seed, i, mc.antithetic);
        double prev = 0.0, r_prev = 0.0, acc = 0.0, acc_a = 0.0;
        run_path(market, info, K, false, [&](const PathView& v) {
            const double p = bond_price(v.state, maturity);
            if (v.k > 0) acc += p / prev - 1.0 - r_prev * grid.dt;
            if (v.k < K) acc_a += dot(v.kernel.lambda, bond_volatility(v.state, v.v_nodes, maturity));
            prev = p;
            r_prev = v.kernel.r;
        });
        realized[i] = acc / t_end;
        analytic[i] = acc_a / static_cast<double>(K);
    });
    BondDriftRegression out;
    out.realized = mc.antithetic ? pair_mean_se(realized) : mean_se(realized);
    out.analytic = mean_se(analytic).mean;
    return out;
}

}  // namespace kernelflow
