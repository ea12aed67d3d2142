#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kernelflow/error.hpp"
#include "kernelflow/info_filter.hpp"
#include "kernelflow/pricing.hpp"
#include "kernelflow/scenario.hpp"

namespace kernelflow {

struct ConfigIssue {
    Errc code;
    std::string path;  // e.g. "assets[1].sigma"
    std::string message;
};

/// All violations found in a config, not just the first. code() is that of the first issue.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct BubbleSpec {
    BubbleSchedule schedule;
    Vec info_direction;
    double info_strength = 1.0;
    double info_decay = 0.1;
    std::vector<SectorSpec> sectors;
    double similarity_threshold = 0.9;
    Window growth{"growth", 0.0, 1.0};
    Window post{"post", 1.5, 2.5};
};

struct PremiumSpec {
    Vec alpha;
    Vec sigma_equity;
    std::vector<double> bond_maturities;
    double orthogonality_tol = 1e-8;
    double horizon = 2.0;
};

struct DiagnoseSpec {
    std::size_t particles = 100000;
    std::vector<double> times;  // defaults to checkpoints
};

struct DumpSpec {
    std::size_t paths = 4;
    std::size_t every = 1;
    bool density_snapshots = false;
};

struct ScenarioConfig {
    double horizon = 10.0;
    double dt = 1.0 / 250.0;
    std::size_t n_paths = 100;
    std::uint64_t seed = 1;
    std::size_t brownian_dim = 3;
    Measure measure = Measure::P;
    bool antithetic = true;
    std::string output = "out";
    std::vector<double> checkpoints{0.5, 1.0, 2.0};
    std::optional<InitialDensity> density;
    std::optional<StructureFunction> structure;  // phi; the simulated v is phi - alpha
    NoiseDrift alpha;
    std::vector<AssetSpec> assets;
    std::vector<ClaimSpec> claims;
    std::optional<BubbleSpec> bubble;
    std::optional<PremiumSpec> premium;
    DiagnoseSpec diagnose;
    DumpSpec dump;
    /// Canonical JSON of the effective document minus "output" (sorted keys), used for hashing.
    std::string canonical;

    TimeGrid grid() const;
    /// v = phi - alpha.
    StructureFunction v() const;
};

/// Parses and validates a JSON scenario. `base_dir` resolves relative CSV paths.
/// Throws ConfigError listing every violation.
ScenarioConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Applies command-line overrides to the raw document before validation.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_paths;
    std::optional<std::string> output;
};
ScenarioConfig parse_config(const std::string& text, const ConfigOverrides& overrides,
                            const std::string& base_dir = ".");
ScenarioConfig load_config(const std::string& file, const ConfigOverrides& overrides = {});

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

/// Two-column (or wider) numeric CSV; lines starting with '#' and a non-numeric header are skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::string& file);

}  // namespace kernelflow
