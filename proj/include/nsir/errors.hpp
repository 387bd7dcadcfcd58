#pragma once

#include <stdexcept>
#include <string>

namespace nsir {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    SinkhornNonConvergence,
    NonConvergence,
    NonPositiveEigenfunction,
    ZeroFunction,
    InconsistentThreshold,
    BracketFailure,
    StepSizeTooLarge,
    NonpositiveI,
    CFLViolation,
    PositivityLoss,
    NewtonStall,
    FrontCollision,
    DomainOverrun,
    BracketInvalid,
    UndecidedProbe,
    EigenvaluePositivityFailure,
    ConfigInvalid,
    MissingArtifact,
};

const char* code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what)
        : std::runtime_error(std::string(code_name(c)) + ": " + what), code_(c) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// config-type errors map to exit code 2, everything else raised by a solver to 3
bool is_config_error(ErrorCode c);

} // namespace nsir
