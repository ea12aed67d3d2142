#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kernelflow/info_filter.hpp"
#include "kernelflow/pricing.hpp"
#include "kernelflow/schedule.hpp"
#include "kernelflow/stats.hpp"

namespace kernelflow {

struct AssetSpec {
    std::string id;
    double S0 = 1.0;
    Schedule sigma;  // t -> volatility vector
    std::string sector;
};

/// Filter plus assets on a simulation grid.
struct MarketModel {
    std::shared_ptr<const FilterModel> filter;
    std::vector<AssetSpec> assets;
    TimeGrid grid;
};

/// Everything known at grid time t_k along one path.
struct PathView {
    std::size_t k;
    double t;
    const FilterState& state;
    std::span<const double> v_nodes;
    const KernelPoint& kernel;
    std::span<const double> log_S;  // one per asset
    double log_B;                   // int r ds
    std::span<const double> sigma;  // asset volatilities at t_k, asset-major
};

using PathObserver = std::function<void(const PathView&)>;

/// Runs the filter along `path` for `steps` steps and integrates the assets in
/// log space, log S += (r + lambda.sigma - 1/2 |sigma|^2) dt + sigma.dxi.
/// The observer sees t_0 .. t_steps. `dual` also computes the rho0 M route.
void run_path(const MarketModel& model, const InformationPath& path, std::size_t steps, bool dual,
              const PathObserver& observer);

/// Price series S_k (k = 0..steps) for each asset along one path.
std::vector<std::vector<double>> simulate_assets(const MarketModel& model, const InformationPath& path);

struct McOptions {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    bool antithetic = true;
    std::size_t threads = 1;
};

/// Mean and SE that respect antithetic pairing.
Estimate mc_estimate(std::span<const double> samples, bool antithetic);
/// Bootstrap SE on (pair-averaged) samples.
double mc_bootstrap_se(std::span<const double> samples, bool antithetic, std::uint64_t seed,
                       std::size_t resamples = 1000);

/// Monte Carlo prices E[pi_T H_T] over P-paths, one estimate per claim.
std::vector<Estimate> price_claims(const MarketModel& model, const std::vector<ClaimSpec>& claims,
                                   const McOptions& mc);

// ---------------------------------------------------------------------------
// Anomalous-drift scenarios

struct SectorSpec {
    std::string name;
    Vec axis;
    double cone_angle = 0.1;  // radians
    std::size_t n_assets = 4;
    double vol = 0.2;
    double S0 = 1.0;
};

/// Volatility vectors within `cone_angle` of the sector axis. Components along
/// each `excluded` unit vector are removed when the axis is orthogonal to it.
std::vector<Vec> cone_sample(const SectorSpec& sector, std::span<const Vec> excluded, RandomStream& rng);

struct BubbleSchedule {
    Vec direction;               // unit vector
    double start = 0.0;          // magnitude at t = 0
    double peak = 0.4;           // magnitude at t1
    double t1 = 1.0;             // reveal time
    double tau = 0.25;           // decay time after t1
    double post_reveal_vol_scale = 2.0;
    double reveal_strength = 2.0;  // k in k exp(-decay u) direction, added to phi at t1
    double reveal_decay = 0.2;

    /// alpha_t = m(t) direction: linear on [0, t1], exponential decay after.
    NoiseDrift alpha(double horizon) const;
};

struct Window {
    std::string name;
    double start = 0.0;
    double end = 1.0;
};

struct ReportRow {
    std::string window;
    std::string sector;
    double excess_return = 0.0;
    double se = 0.0;
    double baseline_excess = 0.0;
    double baseline_se = 0.0;
    double attribution = 0.0;  // windowed mean of alpha.sigma
    double z = 0.0;            // (excess - baseline - attribution) / combined SE
};

struct ScenarioReport {
    std::vector<ReportRow> rows;
    std::string aligned_sector;
    bool growth_attribution_ok = false;
    bool orthogonal_unaffected_ok = false;
    bool burst_negative_ok = false;
    bool ok() const { return growth_attribution_ok && orthogonal_unaffected_ok && burst_negative_ok; }
};

struct BubbleConfig {
    InitialDensity prior;
    Vec info_direction;  // term-structure direction of phi before the reveal
    double info_strength = 1.0;
    double info_decay = 0.1;
    BubbleSchedule schedule;
    std::vector<SectorSpec> sectors;
    double similarity_threshold = 0.9;
    Window growth{"growth", 0.0, 1.0};
    Window post{"post", 1.5, 2.5};
    TimeGrid grid;
    McOptions mc;
};

/// phi: info_strength exp(-info_decay u) info_direction, plus after t1 the
/// reveal term reveal_strength exp(-reveal_decay u) direction.
StructureFunction bubble_structure(const BubbleConfig& cfg);

/// Paired runs (alpha = 0 and alpha = schedule, common random numbers) and the
/// per-sector window report. MisalignedSchedule if no sector clusters around
/// the bubble direction.
ScenarioReport bubble_scenario(const BubbleConfig& cfg);

struct PremiumConfig {
    InitialDensity prior;
    StructureFunction phi;
    Vec alpha;
    Vec sigma_equity;
    double equity_S0 = 1.0;
    std::vector<double> bond_maturities;
    double orthogonality_tol = 1e-8;
    double horizon = 2.0;
    TimeGrid grid;
    McOptions mc;
};

struct PremiumReport {
    std::vector<ReportRow> rows;  // equity and one row per bond
    double equity_minus_bond = 0.0;
    bool equity_attribution_ok = false;
    bool bond_unchanged_ok = false;
    bool ok() const { return equity_attribution_ok && bond_unchanged_ok; }
};

/// NonOrthogonal if |alpha . Sigma_0T| exceeds the tolerance for any bond.
PremiumReport equity_premium_scenario(const PremiumConfig& cfg);

}  // namespace kernelflow
