#include "kernelflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "kernelflow/error.hpp"
#include "kernelflow/parallel.hpp"

namespace kernelflow {

void run_path(const MarketModel& model, const InformationPath& path, std::size_t steps, bool dual,
              const PathObserver& observer)
{
    const auto& grid = model.grid;
    const std::size_t d = model.filter->dim();
    require(path.xi.dim() == d, Errc::dimension_mismatch, "information path dimension differs from the model");
    require(steps <= path.xi.steps(), Errc::out_of_range, "not enough steps in the information path");
    require(std::abs(path.xi.grid().dt - grid.dt) <= 1e-15, Errc::config_mismatch,
            "path and model use different time steps");
    const std::size_t na = model.assets.size();
    for (const auto& a : model.assets)
        require(a.sigma.dim() == d, Errc::dimension_mismatch,
                fmt::format("asset '{}' volatility has dimension {}, expected {}", a.id, a.sigma.dim(), d));

    Filter f(model.filter, grid.dt);
    std::vector<double> log_s(na), sigma(na * d);
    for (std::size_t a = 0; a < na; ++a) log_s[a] = std::log(model.assets[a].S0);
    double log_b = 0.0;
    for (std::size_t k = 0;; ++k) {
        const double t = grid.time(k);
        const KernelPoint kp = kernel(f.state(), f.v_nodes(), dual);
        for (std::size_t a = 0; a < na; ++a)
            model.assets[a].sigma.at(t, std::span<double>(sigma.data() + a * d, d));
        if (observer) observer(PathView{k, t, f.state(), f.v_nodes(), kp, log_s, log_b, sigma});
        if (k == steps) break;
        const auto dxi = path.xi.increment(k);
        for (std::size_t a = 0; a < na; ++a) {
            const std::span<const double> s(sigma.data() + a * d, d);
            log_s[a] += (kp.r + dot(kp.lambda, s) - 0.5 * norm2(s)) * grid.dt + dot(s, dxi);
        }
        log_b += kp.r * grid.dt;
        f.step(dxi);
    }
}

std::vector<std::vector<double>> simulate_assets(const MarketModel& model, const InformationPath& path)
{
    std::vector<std::vector<double>> out(model.assets.size());
    run_path(model, path, path.xi.steps(), false, [&](const PathView& v) {
        for (std::size_t a = 0; a < out.size(); ++a) out[a].push_back(std::exp(v.log_S[a]));
    });
    return out;
}

Estimate mc_estimate(std::span<const double> samples, bool antithetic)
{
    return antithetic ? pair_mean_se(samples) : mean_se(samples);
}

double mc_bootstrap_se(std::span<const double> samples, bool antithetic, std::uint64_t seed,
                       std::size_t resamples)
{
    if (!antithetic) return bootstrap_se(samples, resamples, seed);
    std::vector<double> avg(samples.size() / 2);
    for (std::size_t p = 0; p < avg.size(); ++p) avg[p] = 0.5 * (samples[2 * p] + samples[2 * p + 1]);
    return bootstrap_se(avg, resamples, seed);
}

namespace {

void check_paths(const McOptions& mc)
{
    require(mc.n_paths >= 2, Errc::invariant_violation, "need at least 2 paths");
    require(!mc.antithetic || mc.n_paths % 2 == 0, Errc::invariant_violation,
            "antithetic sampling needs an even path count");
}

}  // namespace

std::vector<Estimate> price_claims(const MarketModel& model, const std::vector<ClaimSpec>& claims,
                                   const McOptions& mc)
{
    check_paths(mc);
    const auto& grid = model.grid;
    std::vector<std::size_t> step(claims.size()), asset(claims.size(), 0);
    std::size_t last = 0;
    for (std::size_t c = 0; c < claims.size(); ++c) {
        const auto& cl = claims[c];
        require(cl.expiry <= grid.horizon() + 1e-12, Errc::config_mismatch,
                fmt::format("claim '{}' expires after the horizon", cl.id));
        step[c] = grid.index_of(cl.expiry);
        last = std::max(last, step[c]);
        if (cl.needs_asset()) {
            const auto it = std::find_if(model.assets.begin(), model.assets.end(),
                                         [&](const AssetSpec& a) { return a.id == cl.asset; });
            require(it != model.assets.end(), Errc::config_mismatch,
                    fmt::format("claim '{}' refers to unknown asset '{}'", cl.id, cl.asset));
            asset[c] = static_cast<std::size_t>(it - model.assets.begin());
        }
    }
    const std::size_t nc = claims.size();
    std::vector<double> samples(mc.n_paths * nc);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
        const auto info = simulate_brownian(grid, model.filter->dim(), mc.seed, i, mc.antithetic);
        run_path(model, info, last, false, [&](const PathView& v) {
            for (std::size_t c = 0; c < nc; ++c)
                if (v.k == step[c]) {
                    const double S = claims[c].needs_asset() ? std::exp(v.log_S[asset[c]]) : 0.0;
                    samples[i * nc + c] = v.kernel.pi * claims[c](S);
                }
        });
    });
    std::vector<Estimate> out(nc);
    std::vector<double> col(mc.n_paths);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t i = 0; i < mc.n_paths; ++i) col[i] = samples[i * nc + c];
        out[c] = mc_estimate(col, mc.antithetic);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Vec> cone_sample(const SectorSpec& sector, std::span<const Vec> excluded, RandomStream& rng)
{
    const std::size_t d = sector.axis.size();
    const double an = norm(sector.axis);
    require(an > 0.0, Errc::invariant_violation, fmt::format("sector '{}' has a zero axis", sector.name));
    const Vec axis = scaled(sector.axis, 1.0 / an);
    std::vector<Vec> basis{axis};
    for (const auto& e : excluded)
        if (std::abs(dot(axis, e)) < 1e-12) basis.push_back(scaled(e, 1.0 / norm(e)));
    std::vector<Vec> out;
    for (std::size_t n = 0; n < sector.n_assets; ++n) {
        Vec w(d);
        rng.normals(w);
        for (const auto& b : basis) w = w - scaled(b, dot(w, b));
        const double wn = norm(w);
        const double psi = sector.cone_angle * rng.uniform();
        Vec s = scaled(axis, std::cos(psi));
        if (wn > 1e-12) s = s + scaled(w, std::sin(psi) / wn);
        out.push_back(scaled(s, sector.vol));
    }
    return out;
}

NoiseDrift BubbleSchedule::alpha(double horizon) const
{
    require(std::abs(norm(direction) - 1.0) <= 1e-9, Errc::invariant_violation, "bubble direction must be a unit vector");
    require(start >= 0.0 && peak >= 0.0, Errc::invariant_violation, "bubble magnitude must be >= 0");
    require(t1 > 0.0 && tau > 0.0, Errc::invariant_violation, "bubble needs t1 > 0 and tau > 0");
    std::vector<double> times{0.0, t1};
    std::vector<Vec> values{scaled(direction, start), scaled(direction, peak)};
    const double h = std::min(tau / 10.0, 0.02);
    for (std::size_t j = 1;; ++j) {
        const double t = t1 + h * static_cast<double>(j);
        times.push_back(t);
        values.push_back(scaled(direction, peak * std::exp(-(t - t1) / tau)));
        if (t >= horizon) break;
    }
    return Schedule::linear(std::move(times), std::move(values));
}

StructureFunction bubble_structure(const BubbleConfig& cfg)
{
    const auto& u = cfg.prior.grid();
    const std::size_t d = cfg.info_direction.size(), n = u.size();
    require(cfg.schedule.direction.size() == d, Errc::dimension_mismatch,
            "bubble direction and information direction differ in dimension");
    std::vector<double> values(2 * n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = cfg.info_strength * std::exp(-cfg.info_decay * u[i]);
        const double b = cfg.schedule.reveal_strength * std::exp(-cfg.schedule.reveal_decay * u[i]);
        for (std::size_t j = 0; j < d; ++j) {
            values[i * d + j] = a * cfg.info_direction[j];
            values[(n + i) * d + j] = a * cfg.info_direction[j] + b * cfg.schedule.direction[j];
        }
    }
    return StructureFunction::tabulated({0.0, cfg.schedule.t1}, u, std::move(values), d,
                                        TabulatedKind::TimeInterpolation::step);
}

namespace {

struct SectorLayout {
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> members;  // asset indices per sector
};

// Per path, per window, per sector: windowed annualised excess log return.
std::vector<double> window_excess(const MarketModel& model, const SectorLayout& layout,
                                  const std::vector<Window>& windows, const McOptions& mc)
{
    const auto& grid = model.grid;
    const std::size_t nw = windows.size(), ns = layout.names.size(), na = model.assets.size();
    const std::size_t d = model.filter->dim();
    std::vector<std::size_t> k0(nw), k1(nw);
    std::size_t last = 0;
    for (std::size_t w = 0; w < nw; ++w) {
        k0[w] = grid.index_of(windows[w].start);
        k1[w] = grid.index_of(windows[w].end);
        require(k1[w] > k0[w], Errc::invariant_violation, fmt::format("window '{}' is empty", windows[w].name));
        last = std::max(last, k1[w]);
    }
    std::vector<double> out(mc.n_paths * nw * ns);
    parallel_for(mc.n_paths, mc.threads, [&](std::size_t i) {
        const auto info = simulate_brownian(grid, d, mc.seed, i, mc.antithetic);
        std::vector<double> comp(na, 0.0), y0(nw * na), y1(nw * na);
        run_path(model, info, last, false, [&](const PathView& v) {
            for (std::size_t w = 0; w < nw; ++w)
                for (std::size_t a = 0; a < na; ++a) {
                    const double y = v.log_S[a] - comp[a];
                    if (v.k == k0[w]) y0[w * na + a] = y;
                    if (v.k == k1[w]) y1[w * na + a] = y;
                }
            for (std::size_t a = 0; a < na; ++a) {
                const std::span<const double> s(v.sigma.data() + a * d, d);
                comp[a] += (v.kernel.r - 0.5 * norm2(s)) * grid.dt;
            }
        });
        for (std::size_t w = 0; w < nw; ++w) {
            const double len = windows[w].end - windows[w].start;
            for (std::size_t s = 0; s < ns; ++s) {
                double acc = 0.0;
                for (std::size_t a : layout.members[s]) acc += (y1[w * na + a] - y0[w * na + a]) / len;
                out[(i * nw + w) * ns + s] = acc / static_cast<double>(layout.members[s].size());
            }
        }
    });
    return out;
}

double windowed_attribution(const NoiseDrift& alpha, const std::vector<AssetSpec>& assets,
                            const std::vector<std::size_t>& members, const Window& w, const TimeGrid& grid)
{
    const std::size_t k0 = grid.index_of(w.start), k1 = grid.index_of(w.end);
    double acc = 0.0;
    for (std::size_t a : members)
        for (std::size_t k = k0; k < k1; ++k) {
            const double t = grid.time(k);
            acc += dot(alpha.at(t), assets[a].sigma.at(t)) * grid.dt;
        }
    return acc / ((w.end - w.start) * static_cast<double>(members.size()));
}

constexpr double kSeFloor = 1e-12;

ReportRow make_row(const std::string& window, const std::string& sector, std::span<const double> scen,
                   std::span<const double> base, double attribution, const McOptions& mc, std::uint64_t tag)
{
    ReportRow r;
    r.window = window;
    r.sector = sector;
    r.excess_return = mc_estimate(scen, mc.antithetic).mean;
    r.baseline_excess = mc_estimate(base, mc.antithetic).mean;
    r.se = mc_bootstrap_se(scen, mc.antithetic, mc.seed ^ tag);
    r.baseline_se = mc_bootstrap_se(base, mc.antithetic, mc.seed ^ (tag + 1));
    r.attribution = attribution;
    // SE floor at rounding level
    const double c = std::max(std::hypot(r.se, r.baseline_se), kSeFloor);
    const double gap = r.excess_return - r.baseline_excess - attribution;
    r.z = gap / c;
    return r;
}

}  // namespace

ScenarioReport bubble_scenario(const BubbleConfig& cfg)
{
    check_paths(cfg.mc);
    const auto& sch = cfg.schedule;
    const std::size_t d = cfg.info_direction.size();
    require(sch.post_reveal_vol_scale >= 1.0, Errc::invariant_violation, "post-reveal vol scale must be >= 1");
    require(!cfg.sectors.empty(), Errc::invariant_violation, "bubble scenario needs sectors");
    const NoiseDrift alpha = sch.alpha(cfg.grid.horizon());
    const StructureFunction phi = bubble_structure(cfg);

    // Volatility clusters and alignment.
    std::vector<std::vector<Vec>> vols;
    std::vector<double> cosine;
    const std::vector<Vec> excluded{sch.direction, cfg.info_direction};
    for (std::size_t s = 0; s < cfg.sectors.size(); ++s) {
        const auto& sec = cfg.sectors[s];
        require(sec.axis.size() == d, Errc::dimension_mismatch,
                fmt::format("sector '{}' axis has dimension {}, expected {}", sec.name, sec.axis.size(), d));
        auto rng = auxiliary_stream(cfg.mc.seed, s, 0xc0e);
        vols.push_back(cone_sample(sec, excluded, rng));
        double c = 0.0;
        for (const auto& v : vols.back()) c += dot(v, sch.direction) / norm(v);
        cosine.push_back(c / static_cast<double>(vols.back().size()));
    }
    const auto best = static_cast<std::size_t>(std::max_element(cosine.begin(), cosine.end()) - cosine.begin());
    if (cosine[best] < cfg.similarity_threshold)
        raise(Errc::misaligned_schedule,
              fmt::format("no sector clusters around the bubble direction (best mean cosine {:.3f} < {:.3f})",
                          cosine[best], cfg.similarity_threshold));

    SectorLayout layout;
    std::vector<AssetSpec> assets;
    for (std::size_t s = 0; s < cfg.sectors.size(); ++s) {
        layout.names.push_back(cfg.sectors[s].name);
        layout.members.emplace_back();
        for (std::size_t n = 0; n < vols[s].size(); ++n) {
            const auto& v = vols[s][n];
            const double scale = s == best ? sch.post_reveal_vol_scale : 1.0;
            layout.members.back().push_back(assets.size());
            assets.push_back({fmt::format("{}_{}", cfg.sectors[s].name, n), cfg.sectors[s].S0,
                              Schedule::piecewise({0.0, sch.t1}, {v, scaled(v, scale)}), cfg.sectors[s].name});
        }
    }

    const MarketModel base{std::make_shared<const FilterModel>(cfg.prior, phi), assets, cfg.grid};
    const MarketModel scen{std::make_shared<const FilterModel>(cfg.prior, recompose(phi, alpha)), assets, cfg.grid};
    const std::vector<Window> windows{cfg.growth, cfg.post};
    const auto xs = window_excess(scen, layout, windows, cfg.mc);
    const auto xb = window_excess(base, layout, windows, cfg.mc);

    ScenarioReport rep;
    rep.aligned_sector = layout.names[best];
    rep.growth_attribution_ok = true;
    rep.orthogonal_unaffected_ok = true;
    rep.burst_negative_ok = true;
    const std::size_t nw = windows.size(), ns = layout.names.size(), np = cfg.mc.n_paths;
    std::vector<double> cs(np), cb(np);
    for (std::size_t w = 0; w < nw; ++w)
        for (std::size_t s = 0; s < ns; ++s) {
            for (std::size_t i = 0; i < np; ++i) {
                cs[i] = xs[(i * nw + w) * ns + s];
                cb[i] = xb[(i * nw + w) * ns + s];
            }
            const double attr = windowed_attribution(alpha, assets, layout.members[s], windows[w], cfg.grid);
            auto row = make_row(windows[w].name, layout.names[s], cs, cb, attr, cfg.mc, 0x100 * (w + 1) + s);
            const bool orthogonal = std::abs(cosine[s]) <= 1.0 - cfg.similarity_threshold;
            if (s == best && w == 0) rep.growth_attribution_ok = std::abs(row.z) <= 3.0;
            if (s == best && w == 1) rep.burst_negative_ok = row.excess_return + 3.0 * row.se < 0.0;
            if (orthogonal && std::abs(row.z) > 3.0) rep.orthogonal_unaffected_ok = false;
            rep.rows.push_back(std::move(row));
        }
    return rep;
}

PremiumReport equity_premium_scenario(const PremiumConfig& cfg)
{
    check_paths(cfg.mc);
    const std::size_t d = cfg.phi.dim();
    require(cfg.alpha.size() == d && cfg.sigma_equity.size() == d, Errc::dimension_mismatch,
            "alpha and equity volatility must match the Brownian dimension");
    const NoiseDrift alpha = Schedule::constant(cfg.alpha);
    const auto base_fm = std::make_shared<const FilterModel>(cfg.prior, cfg.phi);
    const auto scen_fm = std::make_shared<const FilterModel>(cfg.prior, recompose(cfg.phi, alpha));
    const auto s0 = prior_state(scen_fm, cfg.grid.dt);
    for (double T : cfg.bond_maturities) {
        require(T > cfg.horizon, Errc::invariant_violation, "bond maturities must exceed the horizon");
        const double g = dot(cfg.alpha, bond_volatility(s0, T));
        if (std::abs(g) > cfg.orthogonality_tol)
            raise(Errc::non_orthogonal,
                  fmt::format("alpha . Sigma_0T = {:.3e} for T = {} exceeds tolerance {:.1e}", g, T,
                              cfg.orthogonality_tol));
    }
    const std::vector<AssetSpec> assets{{"equity", cfg.equity_S0, Schedule::constant(cfg.sigma_equity), "equity"}};
    const std::size_t K = cfg.grid.index_of(cfg.horizon);
    const std::size_t nb = cfg.bond_maturities.size(), np = cfg.mc.n_paths, nc = 1 + nb;

    auto run = [&](const std::shared_ptr<const FilterModel>& fm) {
        const MarketModel model{fm, assets, cfg.grid};
        std::vector<double> out(np * nc);
        parallel_for(np, cfg.mc.threads, [&](std::size_t i) {
            const auto info = simulate_brownian(cfg.grid, d, cfg.mc.seed, i, cfg.mc.antithetic);
            double comp = 0.0;
            std::vector<double> prev(nb), acc(nb, 0.0);
            double r_prev = 0.0;
            double y0 = 0.0;
            run_path(model, info, K, false, [&](const PathView& v) {
                for (std::size_t b = 0; b < nb; ++b) {
                    const double p = bond_price(v.state, cfg.bond_maturities[b]);
                    if (v.k > 0) acc[b] += p / prev[b] - 1.0 - r_prev * cfg.grid.dt;
                    prev[b] = p;
                }
                r_prev = v.kernel.r;
                const double y = v.log_S[0] - comp;
                if (v.k == 0) y0 = y;
                if (v.k == K) out[i * nc] = (y - y0) / cfg.horizon;
                comp += (v.kernel.r - 0.5 * norm2(v.sigma)) * cfg.grid.dt;
            });
            for (std::size_t b = 0; b < nb; ++b) out[i * nc + 1 + b] = acc[b] / cfg.horizon;
        });
        return out;
    };
    const auto xs = run(scen_fm);
    const auto xb = run(base_fm);

    PremiumReport rep;
    std::vector<double> cs(np), cb(np);
    double bond_mean = 0.0;
    rep.bond_unchanged_ok = true;
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t i = 0; i < np; ++i) {
            cs[i] = xs[i * nc + c];
            cb[i] = xb[i * nc + c];
        }
        const bool equity = c == 0;
        const double attr = equity ? dot(cfg.alpha, cfg.sigma_equity) : 0.0;
        const std::string name = equity ? "equity" : fmt::format("bond_{:g}", cfg.bond_maturities[c - 1]);
        auto row = make_row("long_run", name, cs, cb, attr, cfg.mc, 0x200 + c);
        if (equity)
            rep.equity_attribution_ok = std::abs(row.z) <= 3.0;
        else {
            bond_mean += row.excess_return / static_cast<double>(nb);
            if (std::abs(row.z) > 3.0) rep.bond_unchanged_ok = false;
        }
        rep.rows.push_back(std::move(row));
    }
    rep.equity_minus_bond = rep.rows.front().excess_return - (nb ? bond_mean : 0.0);
    return rep;
}

}  // namespace kernelflow
