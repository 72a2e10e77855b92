#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projlab {

enum class ErrorCode {
    SingularPoint,
    DimensionMismatch,
    CoincidentPoints,
    EquatorSingularity,
    OutsideBall,
    ChartOverflow,
    ZeroGenerator,
    EmptyRegion,
    NonContractive,
    DegenerateScales,
    EmptyGrid,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::EquatorSingularity: return "EquatorSingularity";
    case ErrorCode::OutsideBall: return "OutsideBall";
    case ErrorCode::ChartOverflow: return "ChartOverflow";
    case ErrorCode::ZeroGenerator: return "ZeroGenerator";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NonContractive: return "NonContractive";
    case ErrorCode::DegenerateScales: return "DegenerateScales";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace projlab
