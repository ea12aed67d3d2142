#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kernelflow {

/// Uniform simulation grid t_k = k dt, k = 0..steps.
struct TimeGrid {
    double dt = 1.0 / 250.0;
    std::size_t steps = 2500;
    double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
    double horizon() const noexcept { return time(steps); }
    /// Step index closest to t; throws OutOfRange if t is not on the grid.
    std::size_t index_of(double t) const;
};

/// Brownian-type path on a uniform time grid, kept both as increments and as
/// cumulative values (the latter always rebuilt from the former by the same
/// left-to-right sum).
class Path {
public:
    Path() = default;
    Path(TimeGrid grid, std::size_t dim, std::vector<double> increments);
    /// Keeps `values` (k = 0..steps, starting at 0) verbatim; increments are their differences.
    static Path from_values(TimeGrid grid, std::size_t dim, std::vector<double> values);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t steps() const noexcept { return grid_.steps; }
    std::span<const double> increment(std::size_t k) const { return {increments_.data() + k * dim_, dim_}; }
    /// Value at grid time t_k, k = 0..steps.
    std::span<const double> value(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
    const std::vector<double>& increments() const noexcept { return increments_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    TimeGrid grid_;
    std::size_t dim_ = 0;
    std::vector<double> increments_;
    std::vector<double> values_;
};

}  // namespace kernelflow
