#include "kernelflow/runner.hpp"

#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "kernelflow/measures.hpp"
#include "kernelflow/oracles.hpp"
#include "kernelflow/parallel.hpp"
#include "kernelflow/scenario.hpp"

namespace kernelflow {

namespace {

namespace fs = std::filesystem;

class Output {
public:
    Output(const ScenarioConfig& cfg, std::string subcommand) : dir_(cfg.output)
    {
        manifest_ = {{"config_hash", fnv1a_hex(cfg.canonical)},
                     {"seed", cfg.seed},
                     {"subcommand", std::move(subcommand)},
                     {"version", kVersion},
                     {"libraries",
                      {{"fmt", FMT_VERSION}, {"boost", BOOST_LIB_VERSION}, {"nlohmann_json",
                        fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                    NLOHMANN_JSON_VERSION_PATCH)}}}};
        std::error_code ec;
        fs::create_directories(dir_, ec);
        require(!ec, Errc::io_error, fmt::format("cannot create output directory '{}': {}", dir_, ec.message()));
    }

    // Writes header + rows; rows already formatted.
    std::string write(const std::string& name, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows)
    {
        const auto path = (fs::path(dir_) / name).string();
        std::ofstream out(path, std::ios::binary);
        require(static_cast<bool>(out), Errc::io_error, fmt::format("cannot write '{}'", path));
        out << "# manifest: " << manifest_.dump() << '\n';
        out << fmt::format("{}\n", fmt::join(header, ","));
        for (const auto& r : rows) out << fmt::format("{}\n", fmt::join(r, ","));
        require(static_cast<bool>(out), Errc::io_error, fmt::format("write to '{}' failed", path));
        files_.push_back(path);
        return path;
    }

    void finish(RunResult& res)
    {
        auto m = manifest_;
        m["files"] = nlohmann::json::array();
        for (const auto& f : files_) m["files"].push_back(fs::path(f).filename().string());
        m["acceptance_ok"] = res.acceptance_ok;
        const auto path = (fs::path(dir_) / "manifest.json").string();
        std::ofstream out(path, std::ios::binary);
        require(static_cast<bool>(out), Errc::io_error, fmt::format("cannot write '{}'", path));
        out << m.dump(2) << '\n';
        files_.push_back(path);
        res.files = files_;
    }

private:
    std::string dir_;
    nlohmann::json manifest_;
    std::vector<std::string> files_;
};

std::string num(double x) { return format_number(x); }

McOptions mc_of(const ScenarioConfig& c, std::size_t threads) { return {c.n_paths, c.seed, c.antithetic, threads}; }

const InitialDensity& prior_of(const ScenarioConfig& c)
{
    require(c.density.has_value(), Errc::schema_error, "density missing");
    return *c.density;
}

// Information path of one simulated path under the configured measure.
InformationPath information(const ScenarioConfig& c, const StructureFunction& v, std::size_t i)
{
    const auto grid = c.grid();
    switch (c.measure) {
    case Measure::P: return simulate_brownian(grid, c.brownian_dim, c.seed, i, c.antithetic);
    case Measure::R: {
        auto rng = auxiliary_stream(c.seed, i, 0x52);
        return simulate_information(v, prior_of(c), grid, rng);
    }
    case Measure::PAlpha: {
        auto rng = auxiliary_stream(c.seed, i, 0x52);
        const GaussianNoiseSpec noise{c.alpha, Schedule::constant({1.0})};
        return simulate_information(v, prior_of(c), grid, rng, &noise);
    }
    }
    return {};
}

double z_of(double gap, double se)
{
    if (se > 0.0) return gap / se;
    return gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap);
}

// ---------------------------------------------------------------------------

RunResult simulate(const ScenarioConfig& c, std::size_t threads)
{
    const auto grid = c.grid();
    const auto v = c.v();
    const auto fm = std::make_shared<const FilterModel>(prior_of(c), v);
    const MarketModel model{fm, c.assets, grid};
    const std::size_t d = c.brownian_dim, na = c.assets.size();
    std::vector<std::size_t> cps;
    for (double t : c.checkpoints) cps.push_back(grid.index_of(t));

    std::vector<std::string> fields{"N", "pi", "piB", "Pi", "r"};
    for (std::size_t j = 0; j < d; ++j) fields.push_back(fmt::format("lambda_{}", j));
    for (const auto& a : c.assets) fields.push_back(fmt::format("piS_over_S0_{}", a.id));
    const std::size_t nf = fields.size(), nc = cps.size();

    std::vector<double> values(c.n_paths * nc * nf);
    std::vector<std::vector<std::vector<std::string>>> dumps(std::min(c.dump.paths, c.n_paths));
    std::vector<std::vector<std::string>> snapshots;

    parallel_for(c.n_paths, threads, [&](std::size_t i) {
        const auto info = information(c, v, i);
        Vec W(d, 0.0);
        const bool dump = i < dumps.size();
        run_path(model, info, grid.steps, false, [&](const PathView& pv) {
            for (std::size_t q = 0; q < nc; ++q)
                if (pv.k == cps[q]) {
                    double* out = values.data() + (i * nc + q) * nf;
                    const auto& kp = pv.kernel;
                    out[0] = kp.N;
                    out[1] = kp.pi;
                    out[2] = kp.pi * std::exp(pv.log_B);
                    out[3] = kp.Pi;
                    out[4] = kp.r;
                    for (std::size_t j = 0; j < d; ++j) out[5 + j] = kp.lambda[j];
                    for (std::size_t a = 0; a < na; ++a)
                        out[5 + d + a] = kp.pi * std::exp(pv.log_S[a]) / c.assets[a].S0;
                    if (i == 0 && c.dump.density_snapshots)
                        for (std::size_t n = 0; n < pv.state.density.size(); ++n)
                            snapshots.push_back({num(pv.t), num(fm->prior.grid()[n]), num(pv.state.density[n])});
                }
            if (dump && pv.k % c.dump.every == 0) {
                std::vector<std::string> row{std::to_string(i), num(pv.t)};
                for (std::size_t j = 0; j < d; ++j) row.push_back(num(info.xi.value(pv.k)[j]));
                for (std::size_t j = 0; j < d; ++j) row.push_back(num(W[j]));
                row.push_back(num(pv.kernel.N));
                row.push_back(num(pv.kernel.pi));
                row.push_back(num(pv.kernel.r));
                for (std::size_t j = 0; j < d; ++j) row.push_back(num(pv.kernel.lambda[j]));
                dumps[i].push_back(std::move(row));
            }
            if (pv.k < grid.steps)
                for (std::size_t j = 0; j < d; ++j)
                    W[j] += info.xi.increment(pv.k)[j] - pv.kernel.vhat[j] * grid.dt;
        });
    });

    Output out(c, "simulate");
    RunResult res;
    std::vector<std::vector<std::string>> rows;
    std::vector<double> col(c.n_paths);
    for (std::size_t q = 0; q < nc; ++q)
        for (std::size_t f = 0; f < nf; ++f) {
            for (std::size_t i = 0; i < c.n_paths; ++i) col[i] = values[(i * nc + q) * nf + f];
            const auto e = mc_estimate(col, c.antithetic && c.measure == Measure::P);
            rows.push_back({num(c.checkpoints[q]), fields[f], num(e.mean), num(e.se), std::to_string(e.n)});
        }
    out.write("summary.csv", {"t", "quantity", "mean", "se", "n_paths"}, rows);

    std::vector<std::string> header{"path", "t"};
    for (std::size_t j = 0; j < d; ++j) header.push_back(fmt::format("xi_{}", j));
    for (std::size_t j = 0; j < d; ++j) header.push_back(fmt::format("W_{}", j));
    header.insert(header.end(), {"N", "pi", "r"});
    for (std::size_t j = 0; j < d; ++j) header.push_back(fmt::format("lambda_{}", j));
    std::vector<std::vector<std::string>> all;
    for (auto& p : dumps) all.insert(all.end(), p.begin(), p.end());
    out.write("paths.csv", header, all);
    if (c.dump.density_snapshots) out.write("density_snapshots.csv", {"t", "u", "rho"}, snapshots);
    res.summary = fmt::format("simulated {} paths to t = {}", c.n_paths, grid.horizon());
    out.finish(res);
    return res;
}

RunResult price(const ScenarioConfig& c, std::size_t threads)
{
    require(!c.claims.empty(), Errc::config_mismatch, "price needs at least one claim");
    const auto grid = c.grid();
    const MarketModel model{std::make_shared<const FilterModel>(prior_of(c), c.v()), c.assets, grid};
    const auto est = price_claims(model, c.claims, mc_of(c, threads));
    Output out(c, "price");
    RunResult res;
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < c.claims.size(); ++k)
        rows.push_back({c.claims[k].id, num(est[k].mean), num(est[k].se), std::to_string(c.n_paths),
                        std::to_string(c.seed)});
    out.write("prices.csv", {"claim", "price", "se", "n_paths", "seed"}, rows);
    res.summary = fmt::format("priced {} claims", c.claims.size());
    out.finish(res);
    return res;
}

RunResult invariance(const ScenarioConfig& c, std::size_t threads)
{
    require(!c.claims.empty(), Errc::config_mismatch, "invariance-test needs at least one claim");
    require(c.structure.has_value(), Errc::schema_error, "structure missing");
    const auto grid = c.grid();
    const auto& phi = *c.structure;
    const auto fm0 = std::make_shared<const FilterModel>(prior_of(c), phi);
    const auto fma = std::make_shared<const FilterModel>(prior_of(c), c.v());
    const auto mc = mc_of(c, threads);
    const auto p0 = price_claims({fm0, c.assets, grid}, c.claims, mc);
    const auto pa = price_claims({fma, c.assets, grid}, c.claims, mc);
    const auto s0 = prior_state(fm0, grid.dt), sa = prior_state(fma, grid.dt);

    Output out(c, "invariance-test");
    RunResult res;
    std::vector<std::vector<std::string>> rows;
    double worst = 0.0;
    for (std::size_t k = 0; k < c.claims.size(); ++k) {
        const auto& cl = c.claims[k];
        if (cl.payoff == ClaimSpec::Payoff::bond) {
            const double b0 = bond_price(s0, cl.expiry), ba = bond_price(sa, cl.expiry);
            const double z = z_of(ba - b0, 0.0);
            worst = std::max(worst, std::abs(z));
            rows.push_back({cl.id + "@t0_curve", num(b0), num(ba), num(0.0), num(z)});
        }
        const double se = std::hypot(p0[k].se, pa[k].se);
        const double z = z_of(pa[k].mean - p0[k].mean, se);
        worst = std::max(worst, std::abs(z));
        rows.push_back({cl.id, num(p0[k].mean), num(pa[k].mean), num(se), num(z)});
    }
    out.write("invariance.csv", {"claim", "price_alpha0", "price_alpha", "combined_SE", "z_score"}, rows);
    res.acceptance_ok = worst <= 4.0;
    res.summary = fmt::format("max |z| = {:.3f} over {} rows", worst, rows.size());
    out.finish(res);
    return res;
}

RunResult diagnose(const ScenarioConfig& c, std::size_t threads)
{
    const auto grid = c.grid();
    const auto v = c.v();
    const auto& prior = prior_of(c);
    const auto fm = std::make_shared<const FilterModel>(prior, v);
    const auto info = information(c, v, 0);
    const auto& times = c.diagnose.times;
    std::vector<std::size_t> ks;
    for (double t : times) ks.push_back(grid.index_of(t));

    // Martingale z-scores for N and pi B on P-paths.
    const MarketModel model{fm, {}, grid};
    const std::size_t kmax = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());
    const auto check = mc_martingale_test(
        [&](std::size_t i, std::span<double> out) {
            const auto p = simulate_brownian(grid, c.brownian_dim, c.seed, i, c.antithetic);
            run_path(model, p, kmax, false, [&](const PathView& pv) {
                for (std::size_t q = 0; q < ks.size(); ++q)
                    if (pv.k == ks[q]) {
                        out[2 * q] = pv.kernel.N;
                        out[2 * q + 1] = pv.kernel.pi * std::exp(pv.log_B);
                    }
            });
        },
        2 * ks.size(), c.n_paths, threads, c.antithetic);

    Output out(c, "filter-diagnose");
    RunResult res;
    std::vector<std::vector<std::string>> rows;
    bool ok = check.pass(4.0);
    double worst_l1 = 0.0;
    for (std::size_t q = 0; q < ks.size(); ++q) {
        const auto exact = posterior(fm, info, times[q]);
        const auto part = particle_posterior(v, prior, info, times[q], c.diagnose.particles, c.seed);
        const double l1 = l1_distance(prior.quadrature(), exact.density, part.density);
        worst_l1 = std::max(worst_l1, l1);
        rows.push_back({num(times[q]), num(l1), num(part.ess), num(check.z[2 * q]), num(check.z[2 * q + 1])});
    }
    ok = ok && worst_l1 <= 1e-2;
    out.write("diagnose.csv", {"t", "L1_particle_vs_exact", "ESS", "z_N", "z_piB"}, rows);
    res.acceptance_ok = ok;
    res.summary = fmt::format("max L1 = {:.3e}", worst_l1);
    out.finish(res);
    return res;
}

std::vector<std::vector<std::string>> report_rows(const std::vector<ReportRow>& rows)
{
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.window, r.sector, num(r.excess_return), num(r.se), num(r.baseline_excess), num(r.z)});
    return out;
}

const std::vector<std::string> kReportHeader{"window", "sector", "excess_return", "se", "baseline_excess", "z"};

RunResult bubble(const ScenarioConfig& c, std::size_t threads)
{
    require(c.bubble.has_value(), Errc::config_mismatch, "bubble-demo needs a 'bubble' section");
    const auto& b = *c.bubble;
    BubbleConfig bc{prior_of(c), b.info_direction, b.info_strength, b.info_decay, b.schedule, b.sectors,
                    b.similarity_threshold, b.growth, b.post, c.grid(), mc_of(c, threads)};
    const auto rep = bubble_scenario(bc);
    Output out(c, "bubble-demo");
    RunResult res;
    out.write("bubble.csv", kReportHeader, report_rows(rep.rows));
    res.acceptance_ok = rep.ok();
    res.summary = fmt::format("aligned sector '{}': growth {}, orthogonal {}, burst {}", rep.aligned_sector,
                              rep.growth_attribution_ok ? "ok" : "FAIL", rep.orthogonal_unaffected_ok ? "ok" : "FAIL",
                              rep.burst_negative_ok ? "ok" : "FAIL");
    out.finish(res);
    return res;
}

RunResult premium(const ScenarioConfig& c, std::size_t threads)
{
    require(c.premium.has_value(), Errc::config_mismatch, "premium-demo needs a 'premium' section");
    require(c.structure.has_value(), Errc::schema_error, "structure missing");
    const auto& p = *c.premium;
    PremiumConfig pc{prior_of(c), *c.structure, p.alpha, p.sigma_equity, 1.0, p.bond_maturities,
                     p.orthogonality_tol, p.horizon, c.grid(), mc_of(c, threads)};
    const auto rep = equity_premium_scenario(pc);
    Output out(c, "premium-demo");
    RunResult res;
    out.write("premium.csv", kReportHeader, report_rows(rep.rows));
    res.acceptance_ok = rep.ok();
    res.summary = fmt::format("equity minus bond excess return {:.4f}", rep.equity_minus_bond);
    out.finish(res);
    return res;
}

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> s{"simulate",        "price",       "filter-diagnose",
                                            "invariance-test", "bubble-demo", "premium-demo"};
    return s;
}

RunResult run(const ScenarioConfig& config, const std::string& subcommand, std::size_t threads)
{
    threads = std::max<std::size_t>(threads, 1);
    if (subcommand == "simulate") return simulate(config, threads);
    if (subcommand == "price") return price(config, threads);
    if (subcommand == "filter-diagnose") return diagnose(config, threads);
    if (subcommand == "invariance-test") return invariance(config, threads);
    if (subcommand == "bubble-demo") return bubble(config, threads);
    if (subcommand == "premium-demo") return premium(config, threads);
    raise(Errc::schema_error, fmt::format("unknown subcommand '{}'", subcommand));
}

}  // namespace kernelflow
