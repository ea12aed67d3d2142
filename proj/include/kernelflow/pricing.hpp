#pragma once

#include <span>
#include <string>
#include <vector>

#include "kernelflow/info_filter.hpp"
#include "kernelflow/vec.hpp"

namespace kernelflow {

/// Kernel quantities at one time along a path.
struct KernelPoint {
    double t = 0.0;
    double pi = 1.0;     // N * Pi
    double pi_fh = 1.0;  // int_t rho0 M_t(u) du, computed from M directly (dual route only)
    double Pi = 1.0;     // R_t(X > t)
    double r = 0.0;
    double N = 1.0;
    Vec lambda;       // -E_t[v_t(X) | X > t] under the posterior
    Vec lambda_ratio;  // ratio of tail quadratures against rho0 M (dual route only)
    Vec vhat;
};

/// Both representations of the kernel and risk premium.
KernelPoint kernel(const FilterState& state);
/// Same with v_t already tabulated; `dual` = false skips the rho0 M route.
KernelPoint kernel(const FilterState& state, std::span<const double> v_nodes, bool dual);

/// R_t(X > T) / R_t(X > t).
double bond_price(const FilterState& state, double T);
/// rho_t(t) / R_t(X > t).
double short_rate(const FilterState& state);
/// Ratio form: - int_t rho0 M v / int_t rho0 M.
Vec risk_premium(const FilterState& state);
/// Conditional form: - E_t[v_t(X) | X > t].
Vec risk_premium_conditional(const FilterState& state);

/// Sigma_tT = E_t[v_t(X) | X > T] - E_t[v_t(X) | X > t], the bond volatility.
Vec bond_volatility(const FilterState& state, double T);
Vec bond_volatility(const FilterState& state, std::span<const double> v_nodes, double T);
/// lambda_t . Sigma_tT.
double bond_excess_return(const FilterState& state, double T);

/// R_t(X > t) from the posterior tail.
double r_kernel(const FilterState& state);

/// The family G_t(x) = exp(int (v - vhat).dW - 1/2 int |v - vhat|^2 ds) on the
/// quadrature nodes, driven by innovations increments.
class GFamily {
public:
    explicit GFamily(std::size_t nodes) : log_g_(nodes, 0.0) {}

    /// dW = dxi - vhat dt with vhat and v taken at the left point.
    void step(std::span<const double> v_nodes, std::span<const double> vhat, std::span<const double> dxi,
              double dt);
    const std::vector<double>& log_values() const noexcept { return log_g_; }
    std::vector<double> values() const;
    /// int_t rho0(x) G_t(x) dx.
    double Pi(const InitialDensity& prior, double t) const;

private:
    std::vector<double> log_g_;
};

/// Payoff over the terminal asset price (or a unit payoff for bonds).
struct ClaimSpec {
    enum class Payoff { call, put, bond, custom };
    std::string id;
    Payoff payoff = Payoff::bond;
    double strike = 0.0;
    double expiry = 1.0;
    std::string asset;
    /// Custom payoffs: piecewise-linear table (S, payoff), flat outside.
    std::vector<double> table_s;
    std::vector<double> table_h;

    double operator()(double S) const;
    bool needs_asset() const noexcept { return payoff != Payoff::bond; }
};

}  // namespace kernelflow
