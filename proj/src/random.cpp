#include "kernelflow/random.hpp"

#include <cmath>

namespace kernelflow {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

RandomStream::RandomStream(std::uint64_t master, std::uint64_t index)
    : engine_(stream_seed(master, index))
{
}

double RandomStream::uniform() { return uniform_(engine_); }

double RandomStream::normal() { return normal_(engine_); }

void RandomStream::normals(std::span<double> out)
{
    for (auto& z : out) z = normal_(engine_);
}

std::vector<double> brownian_increments(std::uint64_t master, std::uint64_t path, std::size_t steps,
                                        std::size_t dim, double dt, bool antithetic)
{
    const std::uint64_t stream = antithetic ? path / 2 : path;
    RandomStream rng(master, stream);
    std::vector<double> inc(steps * dim);
    rng.normals(inc);
    double scale = std::sqrt(dt);
    if (antithetic && (path % 2 == 1)) scale = -scale;
    for (auto& x : inc) x *= scale;
    return inc;
}

RandomStream auxiliary_stream(std::uint64_t master, std::uint64_t path, std::uint64_t tag)
{
    return RandomStream(splitmix64(master ^ splitmix64(tag + 1)), path);
}

}  // namespace kernelflow
