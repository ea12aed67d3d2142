#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kernelflow {

/// Trapezoidal quadrature on a fixed, strictly increasing node set starting at 0.
///
/// Every integral in the library (prior mass, posterior normalisation, bond
/// prices, risk premia) goes through one of these, so that identities between
/// modules hold to rounding. Integrands are given by their nodal values and are
/// treated as piecewise linear between nodes.
class Quadrature {
public:
    Quadrature() = default;
    explicit Quadrature(std::vector<double> nodes);

    std::size_t size() const noexcept { return nodes_.size(); }
    double u_max() const noexcept { return nodes_.back(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    struct Cut {
        std::size_t cell;  // nodes[cell] <= t < nodes[cell + 1]
        double frac;       // (t - nodes[cell]) / width
    };
    Cut locate(double t) const;

    double integrate(std::span<const double> f) const;
    /// Integral of f over [t, u_max].
    double tail(std::span<const double> f, double t) const;
    double interpolate(std::span<const double> f, double t) const;

    /// out = integral over [t, u_max] of f(u) g(u,:) du, g node-major with d components.
    void tail_weighted(std::span<const double> f, std::span<const double> g, double t,
                       std::span<double> out) const;
    /// out = integral over [0, u_max] of f(u) g(u,:) du.
    void integrate_weighted(std::span<const double> f, std::span<const double> g,
                            std::span<double> out) const;

    static Quadrature uniform(double u_max, std::size_t n_nodes);

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    bool uniform_ = false;
};

/// Initial discount function P_{0T} sampled on maturities starting at 0.
struct DiscountCurve {
    std::vector<double> maturities;
    std::vector<double> values;
};

struct DensityGrid {
    double u_max = 120.0;
    std::size_t n_grid = 2000;
    double eps_tail = 1e-6;
};

/// Density of the timing variable X on [0, u_max], i.e. the negative slope of the
/// initial discount curve.
///
/// Nodal values are rescaled to unit trapezoidal mass after the tail-mass check,
/// so that survival(0) = 1 and the truncated mass beyond u_max is spread
/// proportionally instead of silently dropped.
class InitialDensity {
public:
    enum class Family { exponential, gamma, tabulated };

    static InitialDensity exponential(double rate, const DensityGrid& grid = {});
    static InitialDensity gamma(double shape, double rate, const DensityGrid& grid = {});
    static InitialDensity tabulated(std::vector<double> grid, std::vector<double> values,
                                    double eps_tail = 1e-6);

    Family family() const noexcept { return family_; }
    double shape() const noexcept { return shape_; }
    double rate() const noexcept { return rate_; }
    double eps_tail() const noexcept { return eps_tail_; }
    double u_max() const noexcept { return quad_.u_max(); }
    /// Trapezoidal mass of the nodal values before rescaling.
    double raw_mass() const noexcept { return raw_mass_; }

    const Quadrature& quadrature() const noexcept { return quad_; }
    const std::vector<double>& grid() const noexcept { return quad_.nodes(); }
    const std::vector<double>& values() const noexcept { return values_; }

    double value_at(double u) const;
    /// Prior probability of X > T, i.e. the t = 0 bond price.
    double survival(double T) const;
    /// rho0(t) / survival(t): the deterministic short rate when the martingale family is trivial.
    double hazard(double t) const;
    /// Inverse of the piecewise-linear nodal CDF.
    double quantile(double p) const;

private:
    InitialDensity(Family family, Quadrature quad, std::vector<double> values, double eps_tail,
                   double analytic_tail);

    Family family_ = Family::tabulated;
    double shape_ = 0.0;
    double rate_ = 0.0;
    double eps_tail_ = 1e-6;
    double raw_mass_ = 0.0;
    Quadrature quad_;
    std::vector<double> values_;
    std::vector<double> cdf_;
};

/// Negated numerical derivative of the curve (three-point formulas, one-sided at the ends).
InitialDensity density_from_curve(const DiscountCurve& curve, double eps_tail = 1e-6);
/// Survival function evaluated on the density's own grid.
DiscountCurve curve_from_density(const InitialDensity& density);

}  // namespace kernelflow
