#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace kernelflow {

/// splitmix64 finaliser; also used to derive per-path seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of stream `index` under `master`. Counter based: independent of the
/// order in which streams are requested.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Per-path random stream. All draws of one path come from here, in a fixed order.
class RandomStream {
public:
    RandomStream(std::uint64_t master, std::uint64_t index);

    double uniform();
    double normal();
    void normals(std::span<double> out);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Brownian increments for path `path` (steps x dim, row-major), scaled by sqrt(dt).
///
/// With `antithetic`, paths 2p and 2p+1 share the draws of stream p with opposite signs.
std::vector<double> brownian_increments(std::uint64_t master, std::uint64_t path, std::size_t steps,
                                        std::size_t dim, double dt, bool antithetic);

/// Sub-stream for path `path` that does not overlap the Brownian stream (used for
/// X draws, cone sampling and similar).
RandomStream auxiliary_stream(std::uint64_t master, std::uint64_t path, std::uint64_t tag);

}  // namespace kernelflow
