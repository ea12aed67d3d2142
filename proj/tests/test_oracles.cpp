#include <doctest.h>

#include <cmath>
#include <memory>

#include "kernelflow/oracles.hpp"
#include "kernelflow/pricing.hpp"
#include "kernelflow/random.hpp"
#include "support.hpp"

using namespace kernelflow;
using doctest::Approx;
using kftest::code_of;

namespace {

const StructureFunction kV = StructureFunction::separable_exponential({0.8, 0.4, 0.0}, 0.1);

}  // namespace

TEST_CASE("riemann integral")
{
    CHECK(riemann_integral([](double x) { return x * x; }, 0.0, 1.0, 1000) == Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(riemann_integral([](double x) { return std::exp(-x); }, 0.0, 50.0, 100000) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("two-point odds against the filter")
{
    const auto prior = kftest::default_prior();
    RandomStream rng(3, 1);
    const TimeGrid g{0.01, 200};
    const auto p = simulate_information(kV, prior, g, rng);
    const auto s = posterior(std::make_shared<const FilterModel>(prior, kV), p, 2.0);
    const double a = prior.grid()[20], b = prior.grid()[300];
    const double lo = two_point_log_odds(kV, a, b, p, 2.0);
    const double filt = std::log(s.density[20] / s.density[300]) - std::log(prior.values()[20] / prior.values()[300]);
    CHECK(std::abs(lo - filt) < 1e-10);
    CHECK(two_point_log_odds(kV, a, a, p, 2.0) == 0.0);
    CHECK(two_point_log_odds(StructureFunction::constant({1.0, 1.0, 1.0}), a, b, p, 2.0) == 0.0);
}

TEST_CASE("particle cloud: unweighted without information")
{
    const auto prior = kftest::default_prior();
    const auto p = simulate_brownian(TimeGrid{0.01, 100}, 3, 1, 0, false);
    const auto c = particle_cloud(StructureFunction::zero(3), prior, p, 1.0, 1000, 2);
    CHECK(c.count() == 1000);
    CHECK(c.ess == Approx(1000.0).epsilon(1e-9));
    double m = 0.0;
    for (double x : c.particles) m += x / 1000.0;
    CHECK(m == Approx(20.0).epsilon(0.02));
    CHECK(code_of([&] { particle_posterior(kV, prior, p, 1.0, 50, 1); }) == Errc::degenerate_ess);
}

TEST_CASE("particle posterior approximates the exact filter")
{
    const auto prior = kftest::default_prior();
    RandomStream rng(4, 0);
    const TimeGrid g{0.004, 500};
    const auto p = simulate_information(kV, prior, g, rng);
    const auto exact = posterior(std::make_shared<const FilterModel>(prior, kV), p, 2.0);
    const auto est = particle_posterior(kV, prior, p, 2.0, 100000, 9);
    CHECK(l1_distance(prior.quadrature(), exact.density, est.density) < 1e-2);
    CHECK(prior.quadrature().integrate(est.density) == Approx(1.0).epsilon(1e-10));
    CHECK(est.ess > 1000.0);
}

TEST_CASE("martingale test statistics")
{
    auto one = [](std::size_t, std::span<double> out) {
        for (auto& x : out) x = 1.0;
    };
    const auto a = mc_martingale_test(one, 3, 100);
    CHECK(a.pass());
    CHECK(a.z[1] == 0.0);

    auto biased = [](std::size_t i, std::span<double> out) {
        for (auto& x : out) x = 1.2 + (i % 2 == 0 ? 0.1 : -0.1);
    };
    CHECK_FALSE(mc_martingale_test(biased, 2, 100).pass());

    // antithetic pairs of a Gaussian exponential martingale
    auto gbm = [](std::size_t i, std::span<double> out) {
        RandomStream r(8, i / 2);
        const double z = i % 2 == 1 ? -r.normal() : r.normal();
        out[0] = std::exp(0.5 * z - 0.125);
    };
    const auto g = mc_martingale_test(gbm, 1, 10000, 2, true);
    CHECK(std::abs(g.z[0]) < 4.0);
    CHECK(g.estimates[0].n == 10000);
}

TEST_CASE("independence test")
{
    RandomStream r(12, 0);
    std::vector<double> x(5000), y(5000), w(5000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = r.normal();
        y[i] = r.normal();
        w[i] = 0.5 + r.uniform();
    }
    const auto ind = independence_test(x, y);
    CHECK(ind.pass);
    CHECK(std::abs(ind.correlation) < 0.05);
    CHECK(ind.n_eff == Approx(5000.0));
    CHECK(independence_test(x, y, w).pass);
    CHECK(independence_test(x, y, w).n_eff < 5000.0);
    const auto dep = independence_test(x, x);
    CHECK_FALSE(dep.pass);
    CHECK(dep.correlation == Approx(1.0));
}

TEST_CASE("bond drift equals lambda . Sigma")
{
    const auto m = std::make_shared<const FilterModel>(kftest::default_prior(), kV);
    const auto reg = bond_drift_regression(m, TimeGrid{0.01, 50}, 5.0, 0.5, McOptions{400, 2, true, 2});
    CHECK(std::abs(reg.realized.mean - reg.analytic) < 4.0 * reg.realized.se);
}
