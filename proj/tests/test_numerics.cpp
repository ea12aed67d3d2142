#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "kernelflow/parallel.hpp"
#include "kernelflow/random.hpp"
#include "kernelflow/stats.hpp"
#include "support.hpp"

using namespace kernelflow;
using doctest::Approx;

TEST_CASE("streams are counter based")
{
    RandomStream a(9, 4), b(9, 4), c(9, 5);
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
    CHECK(stream_seed(9, 4) != stream_seed(9, 5));
    CHECK(stream_seed(9, 4) != stream_seed(10, 4));
}

TEST_CASE("antithetic pairs mirror each other")
{
    const auto p0 = brownian_increments(1, 6, 50, 3, 0.01, true);
    const auto p1 = brownian_increments(1, 7, 50, 3, 0.01, true);
    for (std::size_t i = 0; i < p0.size(); ++i) CHECK(p0[i] == -p1[i]);
    const auto q = brownian_increments(1, 6, 50, 3, 0.01, false);
    CHECK(q != p0);
}

TEST_CASE("increments have Brownian moments")
{
    const double dt = 0.04;
    std::vector<double> x;
    for (std::uint64_t p = 0; p < 200; ++p) {
        const auto inc = brownian_increments(3, p, 100, 1, dt, false);
        x.insert(x.end(), inc.begin(), inc.end());
    }
    const auto v = variance_se(x);
    CHECK(std::abs(kftest::mean(x)) < 4.0 * std::sqrt(dt / static_cast<double>(x.size())));
    CHECK(std::abs(v.mean - dt) < 4.0 * v.se);
}

TEST_CASE("auxiliary streams differ from the Brownian stream")
{
    auto aux = auxiliary_stream(5, 0, 1);
    auto aux2 = auxiliary_stream(5, 0, 2);
    RandomStream main(5, 0);
    const double a = aux.normal(), b = aux2.normal(), m = main.normal();
    CHECK(a != m);
    CHECK(a != b);
}

TEST_CASE("parallel_for fills every slot once, any thread count")
{
    for (std::size_t threads : {1u, 2u, 4u, 8u}) {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("parallel_for rethrows worker errors")
{
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 37) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("basic estimators")
{
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto e = mean_se(x);
    CHECK(e.mean == 2.5);
    CHECK(e.se == Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-14));
    CHECK(variance(x) == Approx(5.0 / 3.0).epsilon(1e-14));
    const auto p = pair_mean_se(x);
    CHECK(p.mean == 2.5);
    CHECK(p.n == 4);  // paths, not pairs
    CHECK(p.se == Approx(1.0).epsilon(1e-14));
    const std::vector<double> w{1.0, 1.0, 1.0, 1.0};
    CHECK(weighted_mean_se(x, w).mean == Approx(2.5).epsilon(1e-14));
    CHECK(effective_sample_size(w) == Approx(4.0).epsilon(1e-14));
    const std::vector<double> w2{1.0, 0.0, 0.0, 0.0};
    CHECK(effective_sample_size(w2) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bootstrap SE tracks the analytic SE")
{
    RandomStream rng(17, 0);
    std::vector<double> x(4000);
    for (auto& v : x) v = rng.normal() * 2.0 + 1.0;
    const double analytic = mean_se(x).se;
    const double boot = bootstrap_se(x, 1000, 99);
    CHECK(boot == Approx(analytic).epsilon(0.1));
    CHECK(boot == bootstrap_se(x, 1000, 99));
}

TEST_CASE("normal cdf and Kolmogorov tail")
{
    CHECK(normal_cdf(0.0) == Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == Approx(0.975).epsilon(1e-12));
    // Q(1.358) is the 5% critical point
    CHECK(kolmogorov_q(1.3581) == Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_q(1.6276) == Approx(0.01).epsilon(2e-3));
}

TEST_CASE("two-sample KS separates shifted samples")
{
    RandomStream a(1, 0), b(1, 1);
    std::vector<double> x(3000), y(3000), z(3000);
    for (auto& v : x) v = a.normal();
    for (auto& v : y) v = b.normal();
    for (auto& v : z) v = b.normal() + 0.2;
    CHECK(ks_two_sample(x, {}, y, {}).p_value > 0.01);
    CHECK(ks_two_sample(x, {}, z, {}).p_value < 1e-4);
    // weights that undo a tilt: draws from N(0.2,1) reweighted by exp(-0.2 z + 0.02) look like N(0,1)
    std::vector<double> wz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) wz[i] = std::exp(-0.2 * z[i] + 0.02);
    CHECK(ks_two_sample(x, {}, z, wz).p_value > 0.01);
}

TEST_CASE("lag-1 autocorrelation")
{
    RandomStream r(2, 0);
    std::vector<double> e(20000);
    for (auto& v : e) v = r.normal();
    CHECK(std::abs(lag1_autocorrelation(e)) < 3.0 / std::sqrt(20000.0));
    std::vector<double> ar(e.size());
    ar[0] = e[0];
    for (std::size_t i = 1; i < e.size(); ++i) ar[i] = 0.5 * ar[i - 1] + e[i];
    CHECK(lag1_autocorrelation(ar) == Approx(0.5).epsilon(0.05));
}
