#pragma once

#include <span>
#include <vector>

#include "kernelflow/info_filter.hpp"
#include "kernelflow/pricing.hpp"

namespace kernelflow {

/// Density process on the simulation grid, values[k] at t_k, values[0] = 1.
struct LikelihoodPath {
    enum class Kind { N, L, QR };
    TimeGrid grid;
    std::vector<double> values;
    Kind kind = Kind::N;
};

/// exp(sum vhat.dxi - 1/2 sum |vhat|^2 dt), one vhat per step (left point).
LikelihoodPath likelihood_N(const InformationPath& path, std::span<const double> vhat_series);
/// exp(-sum alpha.dxi - 1/2 sum |alpha|^2 dt).
LikelihoodPath likelihood_L(const NoiseDrift& alpha, const InformationPath& path);
/// xi^alpha = xi + int alpha ds (increments shifted by alpha_{t_k} dt).
InformationPath shift_information(const InformationPath& path, const NoiseDrift& alpha);

/// lambda from the v-filter on xi, lambda^alpha from the phi-filter on xi^alpha,
/// and residual = lambda - lambda^alpha - alpha_t.
struct PremiumDecomposition {
    Vec lambda;
    Vec lambda_alpha;
    Vec residual;
};
PremiumDecomposition premium_decomposition(const FilterState& v_state, const FilterState& phi_state,
                                           const NoiseDrift& alpha);

/// Runs both filters along the path and returns the largest |residual| component.
double premium_decomposition_sup(const InitialDensity& prior, const StructureFunction& v,
                                 const NoiseDrift& alpha, const InformationPath& path);

/// exp(-sum (vhat + lambda).dW - 1/2 sum |vhat + lambda|^2 dt).
LikelihoodPath qr_density(std::span<const double> vhat_series, std::span<const double> lambda_series,
                          const Path& W);

/// W = xi - int vhat ds (R-Brownian) and W* = xi + int lambda ds (Q-Brownian).
struct InnovationPair {
    Path W;
    Path W_star;
};
InnovationPair innovation_pair(const InformationPath& path, std::span<const double> vhat_series,
                               std::span<const double> lambda_series);

}  // namespace kernelflow
