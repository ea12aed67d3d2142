#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kernelflow {

// Values are part of the C ABI (see kernelflow.h); append only.
enum class Errc : int {
    ok = 0,
    non_monotone_curve = 1,
    tail_mass_too_large = 2,
    out_of_range = 3,
    exhausted_support = 4,
    missing_state = 5,
    dimension_mismatch = 6,
    numerical_underflow = 7,
    negative_density = 8,
    degenerate_ess = 9,
    misaligned_schedule = 10,
    non_orthogonal = 11,
    schema_error = 12,
    invariant_violation = 13,
    config_mismatch = 14,
    not_applicable = 15,
    io_error = 16,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const std::string& message)
{
    if (!condition) raise(code, message);
}

}  // namespace kernelflow
