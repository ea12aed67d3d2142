#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "kernelflow/paths.hpp"
#include "kernelflow/schedule.hpp"
#include "kernelflow/vec.hpp"

namespace kernelflow {

/// v_t(u) = c for all (t, u).
struct ConstantKind {
    Vec c;
    friend bool operator==(const ConstantKind&, const ConstantKind&) = default;
};

/// v_t(u) = c * exp(-decay * u).
struct SeparableExponentialKind {
    Vec c;
    double decay = 0.0;
    friend bool operator==(const SeparableExponentialKind&, const SeparableExponentialKind&) = default;
};

/// Values on a (t, u) lattice, stored [t][u][component]. Linear in u; in t either
/// linear or a step that holds the value of the last knot at or before t.
struct TabulatedKind {
    enum class TimeInterpolation { linear, step };
    std::vector<double> t_grid;
    std::vector<double> u_grid;
    std::vector<double> values;
    TimeInterpolation time_interp = TimeInterpolation::linear;
    friend bool operator==(const TabulatedKind&, const TabulatedKind&) = default;
};

/// v_t(x) = sigma * x * xi_t; needs the current information value.
struct OuStateDependentKind {
    double sigma = 0.0;
    friend bool operator==(const OuStateDependentKind&, const OuStateDependentKind&) = default;
};

/// The family v_t(u): volatility of the kernel martingales and signal
/// map of the information process.
///
/// A structure function is a base kind plus an ordered list of u-independent
/// shifts, v_t(u) = base_t(u) + sum_k sign_k * alpha^k_t. Shifts are restricted
/// to bounded deterministic schedules.
class StructureFunction {
public:
    using Kind = std::variant<ConstantKind, SeparableExponentialKind, TabulatedKind, OuStateDependentKind>;

    struct Shift {
        double sign;
        NoiseDrift drift;
        friend bool operator==(const Shift&, const Shift&) = default;
    };

    StructureFunction(Kind kind, std::size_t dim);

    static StructureFunction zero(std::size_t dim);
    static StructureFunction constant(Vec c);
    static StructureFunction separable_exponential(Vec c, double decay);
    static StructureFunction tabulated(std::vector<double> t_grid, std::vector<double> u_grid,
                                       std::vector<double> values, std::size_t dim,
                                       TabulatedKind::TimeInterpolation time_interp =
                                           TabulatedKind::TimeInterpolation::linear);
    static StructureFunction ou_state_dependent(double sigma, std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    const Kind& kind() const noexcept { return kind_; }
    const std::vector<Shift>& shifts() const noexcept { return shifts_; }

    /// False only for the state-dependent OU kind.
    bool deterministic() const noexcept;
    bool time_independent() const noexcept;

    /// v_t(u). `state` is the current information value, required for the OU kind.
    Vec eval(double t, double u, std::span<const double> state = {}) const;
    void eval_into(double t, double u, std::span<const double> state, std::span<double> out) const;

    /// Returns this structure with `sign * drift` appended; an exactly opposite
    /// trailing shift is removed instead, so that adding and removing the same
    /// drift round-trips bit for bit.
    StructureFunction with_shift(const NoiseDrift& drift, double sign) const;
    /// Same function with all shifts dropped.
    StructureFunction base() const;

    friend bool operator==(const StructureFunction&, const StructureFunction&) = default;

private:
    void base_into(double t, double u, std::span<const double> state, std::span<double> out) const;
    void add_shifts(double t, std::span<double> out) const;

    Kind kind_;
    std::size_t dim_;
    std::vector<Shift> shifts_;
};

/// phi = v + alpha, so that v = phi - alpha.
StructureFunction decompose(const StructureFunction& v, const NoiseDrift& alpha);
/// v = phi - alpha.
StructureFunction recompose(const StructureFunction& phi, const NoiseDrift& alpha);

/// A deterministic structure function evaluated on a fixed u-grid.
///
/// Node profiles are cached at construction; values(t) only interpolates in time
/// and adds the shifts. Output is node-major: out[i * dim + j].
class GridStructure {
public:
    GridStructure(const StructureFunction& v, std::span<const double> u_grid);

    std::size_t nodes() const noexcept { return nodes_; }
    std::size_t dim() const noexcept { return dim_; }
    bool time_independent() const noexcept { return time_independent_; }
    const StructureFunction& function() const noexcept { return function_; }

    void values(double t, std::span<double> out) const;
    std::vector<double> values(double t) const;

private:
    StructureFunction function_;
    std::size_t nodes_;
    std::size_t dim_;
    bool time_independent_;
    std::vector<double> knot_times_;
    std::vector<std::vector<double>> profiles_;
    TabulatedKind::TimeInterpolation time_interp_ = TabulatedKind::TimeInterpolation::linear;
};

/// n_t = sum b_{t_k} dt + gamma_{t_k} dbeta_k (left-point sums).
Path gaussian_noise(const GaussianNoiseSpec& spec, const Path& beta);

/// xi_t = exp(kappa t) int_0^t exp(-kappa s) dbeta_s with kappa = sigma * X,
/// via xi_{k+1} = exp(kappa dt) (xi_k + dbeta_k).
Path ou_information(double sigma, double X, const Path& beta);

}  // namespace kernelflow
