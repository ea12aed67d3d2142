#include <doctest.h>

#include <cmath>
#include <memory>
#include <string>

#include "kernelflow/info_filter.hpp"
#include "kernelflow/random.hpp"
#include "kernelflow/stats.hpp"
#include "support.hpp"

using namespace kernelflow;
using doctest::Approx;
using kftest::code_of;

namespace {

std::shared_ptr<const FilterModel> model_of(const InitialDensity& d, const StructureFunction& v)
{
    return std::make_shared<const FilterModel>(d, v);
}

const StructureFunction kDefaultV = StructureFunction::separable_exponential({0.8, 0.4, 0.0}, 0.1);

InformationPath r_path(const StructureFunction& v, const InitialDensity& d, const TimeGrid& g, std::uint64_t i)
{
    RandomStream rng(77, i);
    return simulate_information(v, d, g, rng);
}

// The stream's Brownian part, redrawn independently of the library's loop.
std::vector<double> beta_of(std::uint64_t i, const TimeGrid& g, std::size_t d)
{
    RandomStream rng(77, i);
    rng.uniform();
    std::vector<double> z(g.steps * d);
    rng.normals(z);
    std::vector<double> b(g.steps * d + d, 0.0);
    for (std::size_t k = 0; k < g.steps; ++k)
        for (std::size_t j = 0; j < d; ++j) b[(k + 1) * d + j] = b[k * d + j] + std::sqrt(g.dt) * z[k * d + j];
    return b;
}

}  // namespace

TEST_CASE("zero signal leaves pure noise")
{
    const TimeGrid g{0.01, 100};
    const auto p = r_path(StructureFunction::zero(2), kftest::default_prior(), g, 3);
    const auto b = beta_of(3, g, 2);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(p.xi.values()[i] == Approx(b[i]).epsilon(1e-13));
    CHECK(p.measure == Measure::R);
    REQUIRE(p.X.has_value());
    CHECK(*p.X > 0.0);
}

TEST_CASE("constant signal adds c t")
{
    const TimeGrid g{0.01, 100};
    const auto p = r_path(StructureFunction::constant({0.3, -0.2}), kftest::default_prior(), g, 4);
    const auto b = beta_of(4, g, 2);
    for (std::size_t k = 0; k <= g.steps; ++k) {
        CHECK(p.xi.value(k)[0] - b[2 * k] == Approx(0.3 * g.time(k)).epsilon(1e-10));
        CHECK(p.xi.value(k)[1] - b[2 * k + 1] == Approx(-0.2 * g.time(k)).epsilon(1e-10));
    }
}

TEST_CASE("drifted noise tags P_alpha")
{
    const TimeGrid g{0.01, 10};
    RandomStream rng(1, 0);
    const GaussianNoiseSpec n{Schedule::constant({0.3}), Schedule::constant({1.0})};
    CHECK(simulate_information(StructureFunction::zero(1), kftest::default_prior(), g, rng, &n).measure ==
          Measure::PAlpha);
}

TEST_CASE("signal mean matches the prior moment")
{
    const auto prior = kftest::default_prior();
    const auto v = StructureFunction::separable_exponential({0.6}, 0.1);
    const TimeGrid g{0.01, 100};
    std::vector<double> m(10000);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = r_path(v, prior, g, i).xi.value(g.steps)[0] / g.horizon();
    const double oracle =
        kftest::midpoint([](double u) { return 0.6 * std::exp(-0.1 * u) * 0.05 * std::exp(-0.05 * u); }, 0.0, 300.0,
                         1000000);
    const auto e = mean_se(m);
    CHECK(std::abs(e.mean - oracle) < 3.0 * e.se);
}

TEST_CASE("posterior at t = 0 is the prior")
{
    const auto prior = kftest::default_prior();
    const auto m = model_of(prior, kDefaultV);
    const TimeGrid g{0.004, 10};
    const auto s = posterior(m, r_path(kDefaultV, prior, g, 0), 0.0);
    CHECK(s.norm() == Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 0; i < s.density.size(); i += 97) CHECK(s.density[i] == Approx(prior.values()[i]).epsilon(1e-14));
}

TEST_CASE("u-independent signal carries no information about X")
{
    const auto prior = kftest::default_prior();
    const auto v = StructureFunction::constant({0.4, -0.1});
    const TimeGrid g{0.01, 200};
    const auto p = r_path(v, prior, g, 5);
    const auto s = posterior(model_of(prior, v), p, 2.0);
    for (std::size_t i = 0; i < s.density.size(); i += 37) CHECK(s.density[i] == Approx(prior.values()[i]).epsilon(1e-12));
    const auto xi = p.xi.value(g.steps);
    const double logN = 0.4 * xi[0] - 0.1 * xi[1] - 0.5 * (0.16 + 0.01) * 2.0;
    CHECK(s.log_norm == Approx(logN).epsilon(1e-11));
}

TEST_CASE("two-hypothesis posterior odds match closed-form Bayes")
{
    const auto prior = kftest::default_prior();
    const TimeGrid g{0.004, 500};
    const auto p = r_path(kDefaultV, prior, g, 9);
    const auto s = posterior(model_of(prior, kDefaultV), p, 2.0);
    const std::size_t ia = prior.quadrature().locate(2.1).cell, ib = prior.quadrature().locate(10.05).cell;
    const double a = prior.grid()[ia], b = prior.grid()[ib];
    // log-likelihood of hypothesis u: v(u).xi_t - |v(u)|^2 t / 2 (v constant in time)
    auto loglik = [&](double u) {
        const auto vu = kDefaultV.eval(0.0, u);
        const auto xi = p.xi.value(g.steps);
        double dot = 0.0, n2 = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            dot += vu[j] * xi[j];
            n2 += vu[j] * vu[j];
        }
        return dot - 0.5 * n2 * 2.0;
    };
    const double odds = std::log(s.density[ia] / s.density[ib]);
    const double bayes = std::log(prior.values()[ia] / prior.values()[ib]) + loglik(a) - loglik(b);
    CHECK(std::abs(odds - bayes) < 1e-10);
}

TEST_CASE("incremental and batch posteriors agree bit for bit")
{
    const auto prior = kftest::default_prior();
    const auto m = model_of(prior, kDefaultV);
    const TimeGrid g{0.004, 1000};
    const auto p = r_path(kDefaultV, prior, g, 1);
    auto s = prior_state(m, g.dt);
    s = update_incremental(s, p.xi.increment(0), g.dt);
    CHECK(s.density == posterior(m, p, g.dt).density);
    for (std::size_t k = 1; k < g.steps; ++k) s = update_incremental(s, p.xi.increment(k), g.dt);
    const auto batch = posterior(m, p, g.horizon());
    double gap = 0.0;
    for (std::size_t i = 0; i < s.density.size(); ++i) gap = std::max(gap, std::abs(s.density[i] - batch.density[i]));
    CHECK(gap <= 1e-12);
    CHECK(s.log_norm == batch.log_norm);

    Filter f(m, g.dt);
    for (std::size_t k = 0; k < g.steps; ++k) f.step(p.xi.increment(k));
    CHECK(f.state().density == batch.density);
    f.reset();
    CHECK(f.state().density == prior_state(m, g.dt).density);
}

TEST_CASE("null increment under zero signal is a fixed point")
{
    const auto prior = kftest::default_prior();
    const auto s0 = prior_state(model_of(prior, StructureFunction::zero(2)), 0.01);
    const std::vector<double> zero{0.0, 0.0};
    const auto s1 = update_incremental(s0, zero, 0.01);
    CHECK(s1.density == s0.density);
    CHECK(std::abs(s1.log_norm) < 1e-15);
    CHECK(code_of([&] { update_incremental(s0, zero, 0.02); }) == Errc::invariant_violation);
    const std::vector<double> wrong{0.0};
    CHECK(code_of([&] { update_incremental(s0, wrong, 0.01); }) == Errc::dimension_mismatch);
}

TEST_CASE("density stays normalised along a long path")
{
    const auto prior = kftest::default_prior();
    const auto m = model_of(prior, kDefaultV);
    const TimeGrid g{0.004, 2500};
    const auto p = simulate_brownian(g, 3, 12, 0, false);
    Filter f(m, g.dt);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.steps; ++k) {
        f.step(p.xi.increment(k));
        worst = std::max(worst, std::abs(prior.quadrature().integrate(f.state().density) - 1.0));
        CHECK(f.state().norm() > 0.0);
    }
    CHECK(worst <= 1e-12);
    for (double x : f.state().density) CHECK(x >= 0.0);
}

TEST_CASE("vhat: constant, analytic and convex hull")
{
    const auto prior = kftest::default_prior();
    const auto c = StructureFunction::constant({0.25, -1.0});
    const auto sc = prior_state(model_of(prior, c), 0.01);
    CHECK(vhat(sc)[0] == Approx(0.25).epsilon(1e-14));
    CHECK(vhat(sc)[1] == Approx(-1.0).epsilon(1e-14));

    const auto unit = InitialDensity::exponential(1.0, {40.0, 20001, 1e-6});
    const auto s = prior_state(model_of(unit, StructureFunction::separable_exponential({1.0}, 1.0)), 0.01);
    CHECK(vhat(s)[0] == Approx(0.5).epsilon(1e-6));

    const auto p = r_path(kDefaultV, prior, TimeGrid{0.01, 300}, 2);
    const auto post = posterior(model_of(prior, kDefaultV), p, 3.0);
    const auto vh = vhat(post);
    CHECK(vh[0] <= 0.8);
    CHECK(vh[0] >= 0.8 * std::exp(-30.0));
    CHECK(vh[2] == 0.0);
}

TEST_CASE("vhat on a tabulated structure matches a fine Riemann oracle")
{
    const auto fine = InitialDensity::exponential(0.05, {300.0, 200001, 1e-6});
    const std::vector<double> us{0.0, 2.0, 10.0, 40.0, 300.0};
    const std::vector<double> vals{1.0, 0.5, 0.8, 0.1, 0.0};
    const auto v = StructureFunction::tabulated({0.0}, us, vals, 1);
    const auto s = prior_state(model_of(fine, v), 0.01);
    auto f = [&](double u) { return v.eval(0.0, u)[0] * 0.05 * std::exp(-0.05 * u); };
    double oracle = 0.0;
    for (std::size_t k = 0; k + 1 < us.size(); ++k) oracle += kftest::midpoint(f, us[k], us[k + 1], 250000);
    CHECK(std::abs(vhat(s)[0] - oracle) < 1e-6);
}

TEST_CASE("innovations subtract the running estimate")
{
    const TimeGrid g{0.01, 50};
    const auto p = r_path(StructureFunction::constant({0.3}), kftest::default_prior(), g, 1);
    std::vector<double> zero(g.steps, 0.0), c(g.steps, 0.3);
    CHECK(innovations(p, zero).values() == p.xi.values());
    const auto W = innovations(p, c);
    for (std::size_t k = 0; k <= g.steps; ++k)
        CHECK(W.value(k)[0] == Approx(p.xi.value(k)[0] - 0.3 * g.time(k)).epsilon(1e-12));
    CHECK(code_of([&] { innovations(p, std::vector<double>(3)); }) == Errc::dimension_mismatch);
}

TEST_CASE("Kushner step: trivial updates")
{
    const auto prior = kftest::default_prior();
    const auto& q = prior.quadrature();
    const GridStructure flat(StructureFunction::constant({0.5}), prior.grid());
    const std::vector<double> dxi{0.03};
    const auto a = kushner_step(q, prior.values(), dxi, flat.values(0.0), 0.01);
    for (std::size_t i = 0; i < a.size(); i += 50) CHECK(a[i] == Approx(prior.values()[i]).epsilon(1e-13));

    const GridStructure gv(kDefaultV, prior.grid());
    const auto vn = gv.values(0.0);
    std::vector<double> vh(3);
    q.integrate_weighted(prior.values(), vn, vh);
    const std::vector<double> neutral{vh[0] * 0.01, vh[1] * 0.01, vh[2] * 0.01};
    for (auto scheme : {KushnerScheme::euler, KushnerScheme::milstein}) {
        const auto b = kushner_step(q, prior.values(), neutral, vn, 0.01, scheme);
        for (std::size_t i = 0; i < b.size(); i += 50)
            CHECK(b[i] == Approx(prior.values()[i]).epsilon(scheme == KushnerScheme::euler ? 1e-13 : 1e-3));
    }
    const std::vector<double> huge{50.0, 0.0, 0.0};
    CHECK(code_of([&] { kushner_step(q, prior.values(), huge, vn, 0.01); }) == Errc::negative_density);
}

TEST_CASE("Kushner propagation converges to the exact posterior")
{
    const auto prior = kftest::default_prior();
    const auto m = model_of(prior, kDefaultV);
    const auto fine = r_path(kDefaultV, prior, TimeGrid{0.001, 1000}, 21);
    auto coarse = [&](std::size_t mult) {
        const std::size_t K = 1000 / mult, d = 3;
        std::vector<double> inc(K * d, 0.0);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t i = 0; i < mult; ++i)
                for (std::size_t j = 0; j < d; ++j) inc[k * d + j] += fine.xi.increment(k * mult + i)[j];
        return InformationPath{Path(TimeGrid{0.001 * static_cast<double>(mult), K}, d, std::move(inc)), Measure::R, fine.X};
    };
    for (auto scheme : {KushnerScheme::euler, KushnerScheme::milstein}) {
        std::vector<double> gaps;
        for (std::size_t mult : {10u, 1u}) {
            const auto p = coarse(mult);
            const auto exact = posterior(m, p, 1.0);
            gaps.push_back(l1_distance(prior.quadrature(), exact.density, kushner_propagate(*m, p, 1.0, scheme)));
        }
        MESSAGE(std::string(scheme == KushnerScheme::euler ? "euler" : "milstein"), " L1 gaps ", gaps[0], " ", gaps[1],
                " ratio ", gaps[0] / gaps[1]);
        CHECK(gaps[1] < gaps[0]);
        if (scheme == KushnerScheme::milstein) CHECK(gaps[0] / gaps[1] > 5.0);
    }
}

TEST_CASE("log N agrees with the Ito sum of vhat, shrinking with dt")
{
    const auto prior = kftest::default_prior();
    const auto m = model_of(prior, kDefaultV);
    std::vector<double> gap;
    for (std::size_t mult : {8u, 4u, 2u, 1u}) {
        double total = 0.0;
        for (std::uint64_t i = 0; i < 8; ++i) {
            const auto fine = simulate_brownian(TimeGrid{0.00025, 8000}, 3, 5, i, false);
            const std::size_t K = 8000 / mult;
            std::vector<double> inc(K * 3, 0.0);
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t r = 0; r < mult; ++r)
                    for (std::size_t j = 0; j < 3; ++j) inc[k * 3 + j] += fine.xi.increment(k * mult + r)[j];
            const TimeGrid g{0.00025 * static_cast<double>(mult), K};
            const InformationPath p{Path(g, 3, std::move(inc)), Measure::P, std::nullopt};
            Filter f(m, g.dt);
            double ito = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const auto vh = f.vhat();
                const auto dx = p.xi.increment(k);
                for (std::size_t j = 0; j < 3; ++j) ito += vh[j] * dx[j] - 0.5 * vh[j] * vh[j] * g.dt;
                f.step(dx);
            }
            total += std::abs(ito - f.state().log_norm);
        }
        gap.push_back(total / 8.0);
    }
    MESSAGE("mean |log N - Ito sum| by dt: ", gap[0], " ", gap[1], " ", gap[2], " ", gap[3]);
    CHECK(gap[1] < gap[0]);
    CHECK(gap[2] < gap[1]);
    CHECK(gap[3] < gap[2]);
}
