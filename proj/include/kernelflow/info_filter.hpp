#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kernelflow/paths.hpp"
#include "kernelflow/random.hpp"
#include "kernelflow/structure_function.hpp"
#include "kernelflow/term_structure.hpp"

namespace kernelflow {

enum class Measure { P, R, PAlpha };

/// Cumulative information path xi on the simulation grid.
struct InformationPath {
    Path xi;
    Measure measure = Measure::P;
    std::optional<double> X;  // set for R / P_alpha simulations
};

/// Pure Brownian information (the law of xi under P). Stream as brownian_increments.
InformationPath simulate_brownian(const TimeGrid& grid, std::size_t dim, std::uint64_t seed,
                                  std::uint64_t path, bool antithetic);

/// xi_t = int v_s(X) ds + n_t with X drawn from the prior by inverse CDF.
/// `noise` defaults to a standard Brownian motion; a noise spec with nonzero
/// drift tags the path P_alpha. The stream supplies X first, then the increments.
InformationPath simulate_information(const StructureFunction& v, const InitialDensity& d,
                                     const TimeGrid& grid, RandomStream& rng,
                                     const GaussianNoiseSpec* noise = nullptr);

/// Prior, structure function and its grid tabulation: the fixed ingredients of
/// a filter. Shared read-only between states and paths.
struct FilterModel {
    FilterModel(InitialDensity prior, StructureFunction v);

    InitialDensity prior;
    StructureFunction v;
    GridStructure grid_v;
    /// |v(u_i)|^2 per node when v is time independent, else empty.
    std::vector<double> v_norm2;

    const Quadrature& quad() const noexcept { return prior.quadrature(); }
    std::size_t nodes() const noexcept { return prior.grid().size(); }
    std::size_t dim() const noexcept { return v.dim(); }
};

/// Conditional density of X given the information up to t = step * dt.
struct FilterState {
    std::shared_ptr<const FilterModel> model;
    std::size_t step = 0;
    double dt = 0.0;
    /// int v.dxi - 1/2 int |v|^2 ds per node, i.e. log M_t(u).
    std::vector<double> log_weights;
    double max_log_weight = 0.0;
    /// log N_t.
    double log_norm = 0.0;
    /// rho_t on the quadrature nodes, unit trapezoidal mass.
    std::vector<double> density;

    double t() const noexcept { return dt * static_cast<double>(step); }
    double norm() const { return std::exp(log_norm); }
};

/// The prior as a filter state at t = 0.
FilterState prior_state(std::shared_ptr<const FilterModel> model, double dt);

/// Exact posterior at time t (a grid time of the path), from the Ito sums of
/// the whole path. NotApplicable for state-dependent structure functions.
FilterState posterior(std::shared_ptr<const FilterModel> model, const InformationPath& path, double t);

/// One streaming step; identical arithmetic to `posterior`, so the results agree bit for bit.
FilterState update_incremental(const FilterState& state, std::span<const double> dxi, double dt);

/// v_hat = int v_t(u) rho_t(u) du.
Vec vhat(const FilterState& state);
Vec vhat(const FilterState& state, std::span<const double> v_nodes);

/// In-place filter for Monte Carlo loops: no allocation per step.
class Filter {
public:
    Filter(std::shared_ptr<const FilterModel> model, double dt);

    void reset();
    void step(std::span<const double> dxi);

    const FilterState& state() const noexcept { return state_; }
    const FilterModel& model() const noexcept { return *state_.model; }
    /// v_t on the nodes at the current time, node-major.
    std::span<const double> v_nodes() const noexcept { return v_; }
    Vec vhat() const { return kernelflow::vhat(state_, v_); }

private:
    void refresh_v();

    FilterState state_;
    std::vector<double> v_;
    std::vector<double> v2_;
};

/// W_t = xi_t - sum vhat_{t_k} dt, one vhat per step (left point), flat steps x dim.
Path innovations(const InformationPath& path, std::span<const double> vhat_series);

enum class KushnerScheme { euler, milstein };

/// One step of the Kushner equation d rho = rho (v - v_hat).(dxi - v_hat dt),
/// followed by renormalisation. Milstein adds the second-order term
/// 1/2 rho sum_jk [(v_j - vh_j)(v_k - vh_k) - C_jk](dxi_j dxi_k - delta_jk dt).
/// Throws NegativeDensity if a node goes below zero.
std::vector<double> kushner_step(const Quadrature& quad, std::span<const double> density,
                                 std::span<const double> dxi, std::span<const double> v_nodes,
                                 double dt, KushnerScheme scheme = KushnerScheme::euler);

/// Propagates the prior with kushner_step along the path up to time t.
std::vector<double> kushner_propagate(const FilterModel& model, const InformationPath& path, double t,
                                      KushnerScheme scheme);

/// Trapezoidal L1 distance between two nodal densities.
double l1_distance(const Quadrature& quad, std::span<const double> a, std::span<const double> b);

}  // namespace kernelflow
