#include "kernelflow/paths.hpp"

#include <cmath>
#include <fmt/format.h>

#include "kernelflow/error.hpp"

namespace kernelflow {

std::size_t TimeGrid::index_of(double t) const
{
    const double k = std::round(t / dt);
    require(k >= 0.0 && k <= static_cast<double>(steps) &&
                std::abs(k * dt - t) <= 1e-9 * std::max(1.0, std::abs(t)),
            Errc::out_of_range, fmt::format("time {} is not on the simulation grid (dt = {})", t, dt));
    return static_cast<std::size_t>(k);
}

Path::Path(TimeGrid grid, std::size_t dim, std::vector<double> increments)
    : grid_(grid), dim_(dim), increments_(std::move(increments))
{
    require(increments_.size() == grid_.steps * dim_, Errc::dimension_mismatch,
            fmt::format("path has {} increments, expected {} x {}", increments_.size(), grid_.steps, dim_));
    values_.assign((grid_.steps + 1) * dim_, 0.0);
    for (std::size_t k = 0; k < grid_.steps; ++k)
        for (std::size_t j = 0; j < dim_; ++j)
            values_[(k + 1) * dim_ + j] = values_[k * dim_ + j] + increments_[k * dim_ + j];
}

Path Path::from_values(TimeGrid grid, std::size_t dim, std::vector<double> values)
{
    require(values.size() == (grid.steps + 1) * dim, Errc::dimension_mismatch, "path value count mismatch");
    Path p;
    p.grid_ = grid;
    p.dim_ = dim;
    p.increments_.resize(grid.steps * dim);
    for (std::size_t i = 0; i < p.increments_.size(); ++i) p.increments_[i] = values[i + dim] - values[i];
    p.values_ = std::move(values);
    return p;
}

}  // namespace kernelflow
