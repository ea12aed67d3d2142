#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kernelflow/vec.hpp"

namespace kernelflow {

/// Deterministic vector-valued map t -> R^d.
///
/// Piecewise-constant schedules hold value i on [times[i], times[i+1]); the first
/// piece extends back to t = 0 and the last one forward to infinity. Linear
/// schedules interpolate between knots and clamp outside them.
class Schedule {
public:
    enum class Interpolation { piecewise_constant, linear };

    Schedule() = default;
    Schedule(Interpolation mode, std::vector<double> times, std::vector<Vec> values);

    static Schedule zero(std::size_t dim);
    static Schedule constant(Vec value);
    static Schedule piecewise(std::vector<double> times, std::vector<Vec> values);
    static Schedule linear(std::vector<double> times, std::vector<Vec> values);

    std::size_t dim() const noexcept { return dim_; }
    Interpolation mode() const noexcept { return mode_; }
    const std::vector<double>& times() const noexcept { return times_; }
    std::span<const double> knot(std::size_t i) const
    {
        return {values_.data() + i * dim_, dim_};
    }
    std::size_t knots() const noexcept { return times_.size(); }

    Vec at(double t) const;
    void at(double t, std::span<double> out) const;
    /// Largest Euclidean norm over all knots (the schedule is bounded by it).
    double sup_norm() const;
    bool is_zero() const;

    friend bool operator==(const Schedule&, const Schedule&) = default;

private:
    Interpolation mode_ = Interpolation::piecewise_constant;
    std::size_t dim_ = 0;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// u-independent additive term of the structure function.
using NoiseDrift = Schedule;

/// Gaussian noise n_t = int b ds + int gamma dbeta with deterministic b (vector)
/// and gamma (positive scalar, stored as a one-dimensional schedule).
struct GaussianNoiseSpec {
    Schedule b;
    Schedule gamma;
};

}  // namespace kernelflow
