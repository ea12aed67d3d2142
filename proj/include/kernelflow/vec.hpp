#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace kernelflow {

// Vector values live in R^d with d the Brownian dimension.
using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline Vec scaled(std::span<const double> a, double s)
{
    Vec out(a.begin(), a.end());
    for (auto& x : out) x *= s;
    return out;
}

inline Vec operator+(const Vec& a, const Vec& b)
{
    Vec out(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

inline Vec operator-(const Vec& a, const Vec& b)
{
    Vec out(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

namespace simd {

// out[i] = scale[i] * exp(x[i] - shift). Inputs must be finite and x[i] <= shift.
// Compiled in a separate translation unit with vectorised libm calls.
void scaled_exp(std::span<const double> scale, std::span<const double> x, double shift,
                std::span<double> out);

}  // namespace simd
}  // namespace kernelflow
