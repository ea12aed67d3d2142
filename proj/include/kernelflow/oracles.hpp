#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kernelflow/info_filter.hpp"
#include "kernelflow/scenario.hpp"
#include "kernelflow/stats.hpp"

namespace kernelflow {

struct ParticleCloud {
    std::vector<double> particles;
    std::vector<double> log_weights;
    double ess = 0.0;
    std::size_t count() const noexcept { return particles.size(); }
};

/// Prior draws X_i = quantile((i + U_i) / n) weighted by exp(sum v(X_i).dxi - 1/2 sum |v(X_i)|^2 dt).
ParticleCloud particle_cloud(const StructureFunction& v, const InitialDensity& d, const InformationPath& path,
                             double t, std::size_t count, std::uint64_t seed);

struct ParticleEstimate {
    std::vector<double> density;  // on the prior's grid, unit trapezoidal mass
    double ess = 0.0;
};

/// Weighted Gaussian kernel density of the cloud (reflected at 0) on the prior grid.
/// bandwidth <= 0 picks two grid spacings. DegenerateESS below 100.
ParticleEstimate particle_posterior(const StructureFunction& v, const InitialDensity& d,
                                    const InformationPath& path, double t, std::size_t count = 100000,
                                    std::uint64_t seed = 1, double bandwidth = 0.0);

struct MartingaleCheck {
    std::vector<Estimate> estimates;  // one per checkpoint
    std::vector<double> z;            // (mean - 1) / SE; 0 when SE = 0 and mean = 1
    bool pass(double bound = 3.0) const;
};

/// sampler(path, out) writes one functional per checkpoint; pairs (2p, 2p+1)
/// are averaged first when `paired`.
MartingaleCheck mc_martingale_test(const std::function<void(std::size_t, std::span<double>)>& sampler,
                                   std::size_t checkpoints, std::size_t n_paths, std::size_t threads = 1,
                                   bool paired = false);

struct IndependenceReport {
    double correlation = 0.0;
    double max_gap = 0.0;
    double threshold = 0.0;
    double n_eff = 0.0;
    bool pass = false;
};

/// Empirical characteristic-function factorisation on standardised samples,
/// gaps |phi(x,y) - phi(x,0) phi(0,y)| over x, y in {-2,-1,1,2}; pass iff every
/// gap is below 5 / sqrt(n_eff). Optional weights (e.g. 1/N_T on R-paths).
IndependenceReport independence_test(std::span<const double> X, std::span<const double> xi,
                                     std::span<const double> weights = {});

/// Log posterior odds of X = a against X = b from the path (prior odds excluded).
double two_point_log_odds(const StructureFunction& v, double a, double b, const InformationPath& path, double t);

/// Midpoint rule on n cells.
double riemann_integral(const std::function<double(double)>& f, double a, double b, std::size_t n);

struct BondDriftRegression {
    Estimate realized;     // mean of (dP/P - r dt) / dt over steps and paths
    double analytic = 0.0;  // mean of lambda . Sigma over the same points
};

/// Monte Carlo drift of a fixed-maturity bond over [0, t_end] under P.
BondDriftRegression bond_drift_regression(std::shared_ptr<const FilterModel> model, const TimeGrid& grid,
                                          double maturity, double t_end, const McOptions& mc);

}  // namespace kernelflow
