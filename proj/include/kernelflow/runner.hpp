#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kernelflow/config.hpp"

namespace kernelflow {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
    bool acceptance_ok = true;
    std::vector<std::string> files;  // written artifacts, in order
    std::string summary;             // short human-readable digest
};

/// Subcommands: simulate, price, filter-diagnose, invariance-test, bubble-demo, premium-demo.
/// Writes CSVs (each starting with a '# manifest:' line) and manifest.json under
/// config.output. Output depends only on the config and seed, never on `threads`.
RunResult run(const ScenarioConfig& config, const std::string& subcommand, std::size_t threads);

const std::vector<std::string>& subcommands();

/// Fixed-format number used in every CSV: shortest round-trip form.
std::string format_number(double x);

}  // namespace kernelflow
