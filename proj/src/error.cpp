#include "kernelflow/error.hpp"

#include <fmt/format.h>

namespace kernelflow {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::ok: return "Ok";
    case Errc::non_monotone_curve: return "NonMonotoneCurve";
    case Errc::tail_mass_too_large: return "TailMassTooLarge";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::exhausted_support: return "ExhaustedSupport";
    case Errc::missing_state: return "MissingState";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::numerical_underflow: return "NumericalUnderflow";
    case Errc::negative_density: return "NegativeDensity";
    case Errc::degenerate_ess: return "DegenerateESS";
    case Errc::misaligned_schedule: return "MisalignedSchedule";
    case Errc::non_orthogonal: return "NonOrthogonal";
    case Errc::schema_error: return "SchemaError";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::config_mismatch: return "ConfigMismatch";
    case Errc::not_applicable: return "NotApplicable";
    case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

void raise(Errc code, const std::string& message)
{
    throw Error(code, fmt::format("{}: {}", to_string(code), message));
}

}  // namespace kernelflow
