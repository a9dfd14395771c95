#include "psusp/errors.hpp"

namespace psusp {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ParseError: return "ParseError";
        case Errc::CapExceeded: return "CapExceeded";
        case Errc::DomainEscape: return "DomainEscape";
        case Errc::NotInvertible: return "NotInvertible";
        case Errc::StageOverflow: return "StageOverflow";
        case Errc::WindowViolation: return "WindowViolation";
        case Errc::InsufficientTrials: return "InsufficientTrials";
        case Errc::NotWandering: return "NotWandering";
        case Errc::GridMismatch: return "GridMismatch";
        case Errc::TailToleranceUnreachable: return "TailToleranceUnreachable";
        case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
        case Errc::NormExceeded: return "NormExceeded";
        case Errc::NotProjection: return "NotProjection";
        case Errc::NotDecreasing: return "NotDecreasing";
        case Errc::Level1NotPreserved: return "Level1NotPreserved";
        case Errc::DegeneratePhases: return "DegeneratePhases";
        case Errc::MassInconsistency: return "MassInconsistency";
        case Errc::BadScales: return "BadScales";
        case Errc::AmbiguousPairing: return "AmbiguousPairing";
    }
    return "Unknown";
}

}  // namespace psusp
