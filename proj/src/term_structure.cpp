#include "kernelflow/term_structure.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include <boost/math/special_functions/gamma.hpp>

#include "kernelflow/error.hpp"

namespace kernelflow {

namespace {

// Four interleaved partial sums; fixed order, so results do not depend on the build.
double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

// out[j] += sum_i w[i] f[i] g[i*d + j] over i in [lo, n), two interleaved banks.
void weighted_sum(const double* w, const double* f, const double* g, std::size_t lo, std::size_t n,
                  std::span<double> out)
{
    const std::size_t d = out.size();
    if (d == 1) {
        double s0 = 0.0, s1 = 0.0;
        std::size_t i = lo;
        for (; i + 2 <= n; i += 2) {
            s0 += w[i] * f[i] * g[i];
            s1 += w[i + 1] * f[i + 1] * g[i + 1];
        }
        for (; i < n; ++i) s0 += w[i] * f[i] * g[i];
        out[0] += s0 + s1;
        return;
    }
    std::vector<double> acc(2 * d, 0.0);
    double* a0 = acc.data();
    double* a1 = acc.data() + d;
    std::size_t i = lo;
    for (; i + 2 <= n; i += 2) {
        const double wf0 = w[i] * f[i], wf1 = w[i + 1] * f[i + 1];
        const double* g0 = g + i * d;
        const double* g1 = g0 + d;
        for (std::size_t j = 0; j < d; ++j) {
            a0[j] += wf0 * g0[j];
            a1[j] += wf1 * g1[j];
        }
    }
    for (; i < n; ++i) {
        const double wf = w[i] * f[i];
        for (std::size_t j = 0; j < d; ++j) a0[j] += wf * g[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) out[j] += a0[j] + a1[j];
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature

Quadrature::Quadrature(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    require(nodes_.size() >= 3, Errc::invariant_violation, "quadrature grid needs at least 3 nodes");
    require(nodes_.front() == 0.0, Errc::invariant_violation, "quadrature grid must start at 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        require(nodes_[i] > nodes_[i - 1], Errc::invariant_violation,
                fmt::format("quadrature grid not strictly increasing at node {}", i));
    const std::size_t n = nodes_.size();
    weights_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = nodes_[i + 1] - nodes_[i];
        weights_[i] += 0.5 * h;
        weights_[i + 1] += 0.5 * h;
    }
}

Quadrature Quadrature::uniform(double u_max, std::size_t n_nodes)
{
    require(u_max > 0.0 && std::isfinite(u_max), Errc::invariant_violation, "u_max must be positive");
    require(n_nodes >= 3, Errc::invariant_violation, "need at least 3 quadrature nodes");
    std::vector<double> nodes(n_nodes);
    const double h = u_max / static_cast<double>(n_nodes - 1);
    for (std::size_t i = 0; i < n_nodes; ++i) nodes[i] = h * static_cast<double>(i);
    nodes.back() = u_max;
    Quadrature q(std::move(nodes));
    q.uniform_ = true;
    return q;
}

Quadrature::Cut Quadrature::locate(double t) const
{
    const std::size_t n = nodes_.size();
    if (t <= 0.0) return {0, 0.0};
    if (t >= nodes_.back()) return {n - 2, 1.0};
    std::size_t k;
    if (uniform_) {
        const double h = nodes_[1];
        k = std::min(static_cast<std::size_t>(t / h), n - 2);
        // Guard against the division landing one cell off.
        while (k > 0 && nodes_[k] > t) --k;
        while (k + 2 < n && nodes_[k + 1] <= t) ++k;
    } else {
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    }
    return {k, (t - nodes_[k]) / (nodes_[k + 1] - nodes_[k])};
}

double Quadrature::integrate(std::span<const double> f) const
{
    return dot(weights_.data(), f.data(), nodes_.size());
}

double Quadrature::interpolate(std::span<const double> f, double t) const
{
    const auto [k, w] = locate(t);
    return f[k] + w * (f[k + 1] - f[k]);
}

double Quadrature::tail(std::span<const double> f, double t) const
{
    const std::size_t n = nodes_.size();
    if (t >= nodes_.back()) return 0.0;
    const auto [k, w] = locate(t);
    const double ft = f[k] + w * (f[k + 1] - f[k]);
    double s = 0.5 * (ft + f[k + 1]) * (nodes_[k + 1] - t);
    if (k + 2 < n) s += 0.5 * (nodes_[k + 2] - nodes_[k + 1]) * f[k + 1];
    if (k + 2 < n) s += dot(weights_.data() + k + 2, f.data() + k + 2, n - k - 2);
    return s;
}

void Quadrature::tail_weighted(std::span<const double> f, std::span<const double> g, double t,
                               std::span<double> out) const
{
    const std::size_t n = nodes_.size();
    const std::size_t d = out.size();
    std::fill(out.begin(), out.end(), 0.0);
    if (t >= nodes_.back()) return;
    const auto [k, w] = locate(t);
    const double cell = 0.5 * (nodes_[k + 1] - t);
    const double head = k + 2 < n ? 0.5 * (nodes_[k + 2] - nodes_[k + 1]) : 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double a = f[k] * g[k * d + j];
        const double b = f[k + 1] * g[(k + 1) * d + j];
        const double at = a + w * (b - a);
        out[j] = cell * (at + b) + head * b;
    }
    weighted_sum(weights_.data(), f.data(), g.data(), k + 2, n, out);
}

void Quadrature::integrate_weighted(std::span<const double> f, std::span<const double> g,
                                    std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    weighted_sum(weights_.data(), f.data(), g.data(), 0, nodes_.size(), out);
}

// ---------------------------------------------------------------------------
// InitialDensity

namespace {
constexpr double kQuadratureSlack = 1e-4;
}

InitialDensity::InitialDensity(Family family, Quadrature quad, std::vector<double> values,
                               double eps_tail, double analytic_tail)
    : family_(family), eps_tail_(eps_tail), quad_(std::move(quad)), values_(std::move(values))
{
    require(eps_tail_ > 0.0 && eps_tail_ < 1.0, Errc::invariant_violation, "eps_tail must lie in (0,1)");
    require(values_.size() == quad_.size(), Errc::dimension_mismatch,
            "density values must match the grid size");
    for (std::size_t i = 0; i < values_.size(); ++i)
        require(std::isfinite(values_[i]) && values_[i] >= 0.0, Errc::invariant_violation,
                fmt::format("density value at node {} is negative or not finite", i));
    if (analytic_tail >= 0.0)
        require(analytic_tail <= eps_tail_, Errc::tail_mass_too_large,
                fmt::format("tail mass beyond u_max = {} is {:.3e} > eps_tail = {:.1e}", quad_.u_max(),
                            analytic_tail, eps_tail_));
    // Trapezoid error on the grid is allowed on top of eps_tail.
    raw_mass_ = quad_.integrate(values_);
    require(raw_mass_ >= 1.0 - eps_tail_ - kQuadratureSlack, Errc::tail_mass_too_large,
            fmt::format("density mass on [0, {}] is {:.12f}, below 1 - eps_tail", quad_.u_max(), raw_mass_));
    require(raw_mass_ <= 1.0 + kQuadratureSlack, Errc::invariant_violation,
            fmt::format("density mass on [0, {}] is {:.12f}, above 1", quad_.u_max(), raw_mass_));
    for (auto& x : values_) x /= raw_mass_;

    const std::size_t n = values_.size();
    const auto& u = quad_.nodes();
    cdf_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cdf_[i] = cdf_[i - 1] + 0.5 * (values_[i - 1] + values_[i]) * (u[i] - u[i - 1]);
}

InitialDensity InitialDensity::exponential(double rate, const DensityGrid& grid)
{
    require(rate > 0.0 && std::isfinite(rate), Errc::invariant_violation, "exponential rate must be positive");
    auto quad = Quadrature::uniform(grid.u_max, grid.n_grid);
    std::vector<double> values(quad.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = rate * std::exp(-rate * quad.nodes()[i]);
    InitialDensity d(Family::exponential, std::move(quad), std::move(values), grid.eps_tail,
                     std::exp(-rate * grid.u_max));
    d.rate_ = rate;
    return d;
}

InitialDensity InitialDensity::gamma(double shape, double rate, const DensityGrid& grid)
{
    require(shape >= 1.0 && std::isfinite(shape), Errc::invariant_violation,
            "gamma shape must be >= 1 (bounded density at 0)");
    require(rate > 0.0 && std::isfinite(rate), Errc::invariant_violation, "gamma rate must be positive");
    auto quad = Quadrature::uniform(grid.u_max, grid.n_grid);
    std::vector<double> values(quad.size());
    const double log_norm = shape * std::log(rate) - std::lgamma(shape);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = quad.nodes()[i];
        if (u == 0.0)
            values[i] = shape == 1.0 ? rate : 0.0;
        else
            values[i] = std::exp(log_norm + (shape - 1.0) * std::log(u) - rate * u);
    }
    const double tail = boost::math::gamma_q(shape, rate * grid.u_max);
    InitialDensity d(Family::gamma, std::move(quad), std::move(values), grid.eps_tail, tail);
    d.shape_ = shape;
    d.rate_ = rate;
    return d;
}

InitialDensity InitialDensity::tabulated(std::vector<double> grid, std::vector<double> values,
                                         double eps_tail)
{
    Quadrature quad(std::move(grid));
    return InitialDensity(Family::tabulated, std::move(quad), std::move(values), eps_tail, -1.0);
}

double InitialDensity::value_at(double u) const
{
    require(u >= 0.0 && u <= u_max(), Errc::out_of_range,
            fmt::format("u = {} outside [0, {}]", u, u_max()));
    return quad_.interpolate(values_, u);
}

double InitialDensity::survival(double T) const
{
    require(T >= 0.0 && T <= u_max(), Errc::out_of_range,
            fmt::format("maturity {} outside [0, {}]", T, u_max()));
    return quad_.tail(values_, T);
}

double InitialDensity::hazard(double t) const
{
    const double s = survival(t);
    require(s > eps_tail_, Errc::exhausted_support,
            fmt::format("survival({}) = {:.3e} is below eps_tail", t, s));
    return quad_.interpolate(values_, t) / s;
}

double InitialDensity::quantile(double p) const
{
    const double total = cdf_.back();
    const double target = std::clamp(p, 0.0, 1.0) * total;
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.begin()) return 0.0;
    if (it == cdf_.end()) return u_max();
    const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[k - 1], c1 = cdf_[k];
    const auto& u = quad_.nodes();
    if (c1 <= c0) return u[k];
    return u[k - 1] + (target - c0) / (c1 - c0) * (u[k] - u[k - 1]);
}

// ---------------------------------------------------------------------------
// Curve conversions

namespace {

// Derivative of the quadratic through (x0,y0), (x1,y1), (x2,y2) evaluated at x.
double lagrange_slope(double x0, double x1, double x2, double y0, double y1, double y2, double x)
{
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return y0 * l0 + y1 * l1 + y2 * l2;
}

}  // namespace

InitialDensity density_from_curve(const DiscountCurve& curve, double eps_tail)
{
    const auto& T = curve.maturities;
    const auto& P = curve.values;
    require(T.size() == P.size() && T.size() >= 3, Errc::invariant_violation,
            "curve needs at least 3 (maturity, value) pairs");
    require(T.front() == 0.0, Errc::invariant_violation, "curve maturities must start at 0");
    require(std::abs(P.front() - 1.0) <= 1e-12, Errc::invariant_violation, "curve value at 0 must be 1");
    for (std::size_t i = 1; i < T.size(); ++i) {
        require(T[i] > T[i - 1], Errc::invariant_violation, "curve maturities must be strictly increasing");
        require(P[i] - P[i - 1] < 0.0, Errc::non_monotone_curve,
                fmt::format("curve does not decrease between maturities {} and {}", T[i - 1], T[i]));
    }
    require(P.back() <= eps_tail, Errc::tail_mass_too_large,
            fmt::format("curve value {:.3e} at u_max = {} exceeds eps_tail", P.back(), T.back()));

    const std::size_t n = T.size();
    std::vector<double> rho(n);
    rho[0] = -lagrange_slope(T[0], T[1], T[2], P[0], P[1], P[2], T[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        rho[i] = -(P[i + 1] - P[i - 1]) / (T[i + 1] - T[i - 1]);
    rho[n - 1] = -lagrange_slope(T[n - 3], T[n - 2], T[n - 1], P[n - 3], P[n - 2], P[n - 1], T[n - 1]);
    // One-sided end formulas can dip below zero on nearly flat tails.
    for (auto& x : rho) x = std::max(x, 0.0);
    return InitialDensity::tabulated(T, std::move(rho), eps_tail);
}

DiscountCurve curve_from_density(const InitialDensity& density)
{
    DiscountCurve curve;
    curve.maturities = density.grid();
    curve.values.reserve(curve.maturities.size());
    for (double T : curve.maturities) curve.values.push_back(density.survival(T));
    return curve;
}

}  // namespace kernelflow
