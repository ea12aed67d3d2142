#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "kernelflow/error.hpp"
#include "kernelflow/term_structure.hpp"

namespace kftest {

inline kernelflow::Errc code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const kernelflow::Error& e) {
        return e.code();
    }
    return kernelflow::Errc::ok;
}

// Midpoint rule on n cells; kept separate from the library's oracle on purpose.
inline double midpoint(const std::function<double(double)>& f, double a, double b, std::size_t n)
{
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Kahan: a million terms
        const double y = f(a + (static_cast<double>(i) + 0.5) * h) * h - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

inline double gamma_pdf(double shape, double rate, double u)
{
    if (u <= 0.0) return shape == 1.0 ? rate : 0.0;
    return std::exp(shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(u) - rate * u);
}

inline kernelflow::InitialDensity default_prior()
{
    return kernelflow::InitialDensity::exponential(0.05, {300.0, 2000, 1e-6});
}

inline double mean(std::span<const double> x)
{
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_se(std::span<const double> x)
{
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

}  // namespace kftest
