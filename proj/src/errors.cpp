#include "nsir/errors.hpp"

namespace nsir {

const char* code_name(ErrorCode c)
{
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SinkhornNonConvergence: return "SinkhornNonConvergence";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonPositiveEigenfunction: return "NonPositiveEigenfunction";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::InconsistentThreshold: return "InconsistentThreshold";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorCode::NonpositiveI: return "NonpositiveI";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::PositivityLoss: return "PositivityLoss";
    case ErrorCode::NewtonStall: return "NewtonStall";
    case ErrorCode::FrontCollision: return "FrontCollision";
    case ErrorCode::DomainOverrun: return "DomainOverrun";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::UndecidedProbe: return "UndecidedProbe";
    case ErrorCode::EigenvaluePositivityFailure: return "EigenvaluePositivityFailure";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    }
    return "Unknown";
}

bool is_config_error(ErrorCode c)
{
    return c == ErrorCode::ConfigInvalid || c == ErrorCode::MissingArtifact ||
           c == ErrorCode::InvalidArgument;
}

} // namespace nsir
