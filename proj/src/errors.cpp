#include "eeb/errors.hpp"

namespace eeb {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DomainExit: return "DomainExit";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::NoCrossing: return "NoCrossing";
        case ErrorCode::SameTrajectory: return "SameTrajectory";
        case ErrorCode::NeedTwoCrossings: return "NeedTwoCrossings";
        case ErrorCode::ConstructionFailed: return "ConstructionFailed";
        case ErrorCode::MultipleEquilibria: return "MultipleEquilibria";
        case ErrorCode::NoEquilibrium: return "NoEquilibrium";
        case ErrorCode::CoincidentEquilibria: return "CoincidentEquilibria";
        case ErrorCode::NonHyperbolic: return "NonHyperbolic";
        case ErrorCode::Refused: return "Refused";
        case ErrorCode::BranchingViolated: return "BranchingViolated";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorCode::UnknownFunction: return "UnknownFunction";
        case ErrorCode::EvalDomain: return "DomainError";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace eeb
