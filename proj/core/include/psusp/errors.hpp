#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psusp {

enum class Errc {
    InvalidArgument,
    ParseError,
    CapExceeded,
    DomainEscape,
    NotInvertible,
    StageOverflow,
    WindowViolation,
    InsufficientTrials,
    NotWandering,
    GridMismatch,
    TailToleranceUnreachable,
    NotPositiveDefinite,
    NormExceeded,
    NotProjection,
    NotDecreasing,
    Level1NotPreserved,
    DegeneratePhases,
    MassInconsistency,
    BadScales,
    AmbiguousPairing,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace psusp
