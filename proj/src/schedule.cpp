#include "kernelflow/schedule.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "kernelflow/error.hpp"

namespace kernelflow {

Schedule::Schedule(Interpolation mode, std::vector<double> times, std::vector<Vec> values)
    : mode_(mode), times_(std::move(times))
{
    require(!times_.empty() && times_.size() == values.size(), Errc::invariant_violation,
            "schedule needs one value per knot and at least one knot");
    dim_ = values.front().size();
    require(dim_ >= 1, Errc::invariant_violation, "schedule values must have dimension >= 1");
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i].size() == dim_, Errc::dimension_mismatch,
                fmt::format("schedule knot {} has dimension {}, expected {}", i, values[i].size(), dim_));
        if (i > 0)
            require(times_[i] > times_[i - 1], Errc::invariant_violation,
                    "schedule knot times must be strictly increasing");
        values_.insert(values_.end(), values[i].begin(), values[i].end());
    }
    for (double x : values_)
        require(std::isfinite(x), Errc::invariant_violation, "schedule values must be finite");
}

Schedule Schedule::zero(std::size_t dim) { return constant(Vec(dim, 0.0)); }

Schedule Schedule::constant(Vec value)
{
    return Schedule(Interpolation::piecewise_constant, {0.0}, {std::move(value)});
}

Schedule Schedule::piecewise(std::vector<double> times, std::vector<Vec> values)
{
    return Schedule(Interpolation::piecewise_constant, std::move(times), std::move(values));
}

Schedule Schedule::linear(std::vector<double> times, std::vector<Vec> values)
{
    return Schedule(Interpolation::linear, std::move(times), std::move(values));
}

Vec Schedule::at(double t) const
{
    Vec out(dim_);
    at(t, out);
    return out;
}

void Schedule::at(double t, std::span<double> out) const
{
    const std::size_t n = times_.size();
    if (n == 1 || t <= times_.front()) {
        std::copy_n(values_.begin(), dim_, out.begin());
        return;
    }
    // Index of the last knot with times_[i] <= t.
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (mode_ == Interpolation::piecewise_constant || i + 1 >= n) {
        std::copy_n(values_.begin() + i * dim_, dim_, out.begin());
        return;
    }
    const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    for (std::size_t j = 0; j < dim_; ++j) {
        const double a = values_[i * dim_ + j];
        const double b = values_[(i + 1) * dim_ + j];
        out[j] = a + w * (b - a);
    }
}

double Schedule::sup_norm() const
{
    double best = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) best = std::max(best, norm(knot(i)));
    return best;
}

bool Schedule::is_zero() const
{
    return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

}  // namespace kernelflow
