#include "kernelflow/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "kernelflow/error.hpp"

namespace kernelflow {

namespace {

double checked_tail(const FilterState& s, double t)
{
    const auto& m = *s.model;
    require(t >= 0.0 && t <= m.prior.u_max(), Errc::out_of_range,
            fmt::format("time {} outside [0, {}]", t, m.prior.u_max()));
    const double tail = m.quad().tail(s.density, t);
    require(tail > m.prior.eps_tail(), Errc::exhausted_support,
            fmt::format("R(X > {}) = {:.3e} is below eps_tail", t, tail));
    return tail;
}

Vec conditional_mean(const FilterState& s, std::span<const double> v_nodes, double t, double tail)
{
    Vec out(s.model->dim());
    s.model->quad().tail_weighted(s.density, v_nodes, t, out);
    for (auto& x : out) x /= tail;
    return out;
}

}  // namespace

KernelPoint kernel(const FilterState& state, std::span<const double> v_nodes, bool dual)
{
    const auto& m = *state.model;
    const auto& q = m.quad();
    const double t = state.t();
    KernelPoint k;
    k.t = t;
    k.Pi = checked_tail(state, t);
    k.N = state.norm();
    k.pi = k.N * k.Pi;
    k.r = q.interpolate(state.density, t) / k.Pi;
    k.lambda = conditional_mean(state, v_nodes, t, k.Pi);
    for (auto& x : k.lambda) x = -x;
    k.vhat = vhat(state, v_nodes);
    if (dual) {
        // rho0 M_t(u) with M evaluated directly; shifted only if it would overflow.
        const double shift = state.max_log_weight > 600.0 ? state.max_log_weight : 0.0;
        std::vector<double> w(m.nodes());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = m.prior.values()[i] * std::exp(state.log_weights[i] - shift);
        const double tail = q.tail(w, t);
        k.pi_fh = std::exp(shift) * tail;
        k.lambda_ratio.assign(m.dim(), 0.0);
        q.tail_weighted(w, v_nodes, t, k.lambda_ratio);
        for (auto& x : k.lambda_ratio) x = -x / tail;
    } else {
        k.pi_fh = k.pi;
        k.lambda_ratio = k.lambda;
    }
    return k;
}

KernelPoint kernel(const FilterState& state)
{
    return kernel(state, state.model->grid_v.values(state.t()), true);
}

double bond_price(const FilterState& state, double T)
{
    const double t = state.t();
    require(T >= t - 1e-12, Errc::out_of_range, fmt::format("maturity {} before t = {}", T, t));
    const double den = checked_tail(state, t);
    if (T <= t) return 1.0;
    require(T <= state.model->prior.u_max(), Errc::out_of_range, "maturity beyond u_max");
    return state.model->quad().tail(state.density, T) / den;
}

double short_rate(const FilterState& state)
{
    const double t = state.t();
    const double den = checked_tail(state, t);
    return state.model->quad().interpolate(state.density, t) / den;
}

Vec risk_premium(const FilterState& state) { return kernel(state).lambda_ratio; }

Vec risk_premium_conditional(const FilterState& state)
{
    const auto v = state.model->grid_v.values(state.t());
    return kernel(state, v, false).lambda;
}

Vec bond_volatility(const FilterState& state, std::span<const double> v_nodes, double T)
{
    const double t = state.t();
    require(T > t, Errc::out_of_range, "bond volatility needs T > t");
    const double tail_t = checked_tail(state, t);
    const double tail_T = checked_tail(state, T);
    const Vec a = conditional_mean(state, v_nodes, T, tail_T);
    const Vec b = conditional_mean(state, v_nodes, t, tail_t);
    return a - b;
}

Vec bond_volatility(const FilterState& state, double T)
{
    return bond_volatility(state, state.model->grid_v.values(state.t()), T);
}

double bond_excess_return(const FilterState& state, double T)
{
    const auto v = state.model->grid_v.values(state.t());
    const auto k = kernel(state, v, false);
    return dot(k.lambda, bond_volatility(state, v, T));
}

double r_kernel(const FilterState& state) { return checked_tail(state, state.t()); }

void GFamily::step(std::span<const double> v_nodes, std::span<const double> vh, std::span<const double> dxi,
                   double dt)
{
    const std::size_t d = vh.size();
    Vec dw(d);
    for (std::size_t j = 0; j < d; ++j) dw[j] = dxi[j] - vh[j] * dt;
    for (std::size_t i = 0; i < log_g_.size(); ++i) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double e = v_nodes[i * d + j] - vh[j];
            a += e * dw[j];
            b += e * e;
        }
        log_g_[i] += a - 0.5 * b * dt;
    }
}

std::vector<double> GFamily::values() const
{
    std::vector<double> g(log_g_.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(log_g_[i]);
    return g;
}

double GFamily::Pi(const InitialDensity& prior, double t) const
{
    std::vector<double> f = values();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= prior.values()[i];
    return prior.quadrature().tail(f, t);
}

double ClaimSpec::operator()(double S) const
{
    switch (payoff) {
    case Payoff::call: return std::max(S - strike, 0.0);
    case Payoff::put: return std::max(strike - S, 0.0);
    case Payoff::bond: return 1.0;
    case Payoff::custom: {
        if (table_s.empty()) return 0.0;
        if (S <= table_s.front()) return table_h.front();
        if (S >= table_s.back()) return table_h.back();
        const auto it = std::upper_bound(table_s.begin(), table_s.end(), S);
        const std::size_t k = static_cast<std::size_t>(it - table_s.begin()) - 1;
        const double w = (S - table_s[k]) / (table_s[k + 1] - table_s[k]);
        return table_h[k] + w * (table_h[k + 1] - table_h[k]);
    }
    }
    return 0.0;
}

}  // namespace kernelflow
