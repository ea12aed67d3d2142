#include <doctest.h>

#include <cmath>
#include <memory>

#include "kernelflow/measures.hpp"
#include "kernelflow/random.hpp"
#include "kernelflow/stats.hpp"
#include "support.hpp"

using namespace kernelflow;
using doctest::Approx;
using kftest::code_of;

namespace {

const StructureFunction kV = StructureFunction::separable_exponential({0.8, 0.4, 0.0}, 0.1);

}  // namespace

TEST_CASE("likelihood L: trivial and constant drift")
{
    const auto p = simulate_brownian(TimeGrid{0.01, 100}, 2, 1, 0, false);
    const auto L0 = likelihood_L(NoiseDrift::zero(2), p);
    for (double x : L0.values) CHECK(x == 1.0);
    CHECK(L0.kind == LikelihoodPath::Kind::L);
    const auto L = likelihood_L(NoiseDrift::constant({0.3, -0.1}), p);
    for (std::size_t k = 0; k <= 100; k += 10) {
        const auto xi = p.xi.value(k);
        const double t = p.xi.grid().time(k);
        CHECK(L.values[k] == Approx(std::exp(-0.3 * xi[0] + 0.1 * xi[1] - 0.5 * 0.1 * t)).epsilon(1e-11));
    }
    CHECK(code_of([&] { likelihood_L(NoiseDrift::zero(3), p); }) == Errc::dimension_mismatch);
}

TEST_CASE("L is a unit-mean density that removes the drift")
{
    const auto alpha = NoiseDrift::piecewise({0.0, 0.5}, {{0.4}, {-0.2}});
    const TimeGrid g{0.01, 100};
    std::vector<double> l(20000), lx(20000);
    for (std::size_t i = 0; i < l.size(); ++i) {
        const auto p = simulate_brownian(g, 1, 33, i, false);
        const auto L = likelihood_L(alpha, p);
        l[i] = L.values.back();
        lx[i] = l[i] * p.xi.value(g.steps)[0];
    }
    const auto e = mean_se(l);
    CHECK(std::abs(e.mean - 1.0) < 4.0 * e.se);
    // under L dP the path has drift -alpha: E[xi_1] = -(0.4 * 0.5 - 0.2 * 0.5)
    const auto m = mean_se(lx);
    CHECK(std::abs(m.mean + 0.1) < 4.0 * m.se);
}

TEST_CASE("shift adds alpha dt to every increment")
{
    const auto p = simulate_brownian(TimeGrid{0.01, 50}, 2, 2, 0, false);
    CHECK(shift_information(p, NoiseDrift::zero(2)).xi.values() == p.xi.values());
    const auto s = shift_information(p, NoiseDrift::constant({0.3, 0.0}));
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(s.xi.increment(k)[0] == Approx(p.xi.increment(k)[0] + 0.003).epsilon(1e-14));
        CHECK(s.xi.increment(k)[1] == p.xi.increment(k)[1]);
    }
    CHECK(code_of([&] { shift_information(p, NoiseDrift::zero(1)); }) == Errc::dimension_mismatch);
}

TEST_CASE("premium decomposition holds exactly along paths")
{
    const auto prior = kftest::default_prior();
    const auto alphas = {NoiseDrift::constant({0.3, 0.0, 0.0}),
                         NoiseDrift::piecewise({0.0, 0.4}, {{0.1, -0.2, 0.05}, {-0.3, 0.2, 0.0}}),
                         NoiseDrift::linear({0.0, 1.0}, {{0.0, 0.0, 0.0}, {0.5, -0.5, 0.25}})};
    std::uint64_t i = 0;
    for (const auto& a : alphas) {
        RandomStream rng(5, i++);
        const auto p = simulate_information(kV, prior, TimeGrid{0.004, 250}, rng);
        CHECK(premium_decomposition_sup(prior, kV, a, p) <= 1e-12);
    }
}

TEST_CASE("premium decomposition on filter states")
{
    const auto prior = kftest::default_prior();
    const auto a = NoiseDrift::constant({0.2, 0.0, -0.1});
    const auto vm = std::make_shared<const FilterModel>(prior, kV);
    const auto pm = std::make_shared<const FilterModel>(prior, decompose(kV, a));
    RandomStream rng(6, 0);
    const auto p = simulate_information(kV, prior, TimeGrid{0.01, 100}, rng);
    const auto q = shift_information(p, a);
    Filter fv(vm, 0.01), fp(pm, 0.01);
    for (std::size_t k = 0; k < 100; ++k) {
        fv.step(p.xi.increment(k));
        fp.step(q.xi.increment(k));
    }
    // phi-posterior on xi^alpha is the v-posterior on xi
    for (std::size_t i = 0; i < prior.grid().size(); i += 41)
        CHECK(fp.state().density[i] == Approx(fv.state().density[i]).epsilon(1e-11));
    const auto r = premium_decomposition(fv.state(), fp.state(), a);
    for (double x : r.residual) CHECK(std::abs(x) <= 1e-12);
    CHECK(r.lambda_alpha[0] == Approx(r.lambda[0] - 0.2).epsilon(1e-12));
    fp.step(q.xi.increment(0));
    CHECK(code_of([&] { premium_decomposition(fv.state(), fp.state(), a); }) == Errc::invariant_violation);
}

TEST_CASE("N from the vhat series matches the filter normaliser")
{
    const auto prior = kftest::default_prior();
    const auto m = std::make_shared<const FilterModel>(prior, kV);
    const auto p = simulate_brownian(TimeGrid{0.002, 500}, 3, 4, 0, false);
    Filter f(m, 0.002);
    std::vector<double> vh;
    for (std::size_t k = 0; k < 500; ++k) {
        const auto v = f.vhat();
        vh.insert(vh.end(), v.begin(), v.end());
        f.step(p.xi.increment(k));
    }
    const auto N = likelihood_N(p, vh);
    CHECK(N.values.front() == 1.0);
    CHECK(N.values.back() == Approx(f.state().norm()).epsilon(1e-2));
    CHECK(code_of([&] { likelihood_N(p, std::vector<double>(10)); }) == Errc::dimension_mismatch);
}

TEST_CASE("R to Q density and the two Brownian motions")
{
    const auto prior = kftest::default_prior();
    const auto c = StructureFunction::constant({0.3});
    RandomStream rng(2, 0);
    const TimeGrid g{0.01, 100};
    const auto p = simulate_information(c, prior, g, rng);
    const std::vector<double> vh(100, 0.3), lam(100, -0.3);
    const auto pair = innovation_pair(p, vh, lam);
    for (std::size_t k = 0; k <= 100; ++k) CHECK(pair.W_star.value(k)[0] == Approx(pair.W.value(k)[0]).epsilon(1e-12));
    // vhat + lambda = 0: R and Q coincide
    for (double x : qr_density(vh, lam, pair.W).values) CHECK(x == 1.0);

    const std::vector<double> lam2(100, 0.1);
    const auto q = qr_density(vh, lam2, pair.W);
    CHECK(q.kind == LikelihoodPath::Kind::QR);
    CHECK(q.values.back() == Approx(std::exp(-0.4 * pair.W.value(100)[0] - 0.5 * 0.16)).epsilon(1e-11));
    CHECK(code_of([&] { qr_density(vh, std::vector<double>(5), pair.W); }) == Errc::dimension_mismatch);
}
