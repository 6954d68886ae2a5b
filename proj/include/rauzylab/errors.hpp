#pragma once

#include <stdexcept>
#include <string>

namespace rauzylab {

// Base error carrying a stable machine-readable code alongside the message.
// Codes are what the CLI prints on stderr and what tests match on.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

    // Exit-code class for the CLI: 2 = precondition violation, 3 = numerical abort.
    virtual int exit_class() const noexcept { return 2; }

private:
    std::string code_;
};

#define RAUZYLAB_DEFINE_ERROR(NAME, EXIT)                                     \
    class NAME : public Error {                                               \
    public:                                                                   \
        explicit NAME(const std::string& what) : Error(#NAME, what) {}        \
        int exit_class() const noexcept override { return EXIT; }             \
    };

RAUZYLAB_DEFINE_ERROR(InvalidPermutation, 2)
RAUZYLAB_DEFINE_ERROR(InvalidLength, 2)
RAUZYLAB_DEFINE_ERROR(DomainError, 2)
RAUZYLAB_DEFINE_ERROR(TieError, 2)
RAUZYLAB_DEFINE_ERROR(NotNormalized, 2)
RAUZYLAB_DEFINE_ERROR(ReduciblePermutation, 2)
RAUZYLAB_DEFINE_ERROR(NearDegenerate, 3)
RAUZYLAB_DEFINE_ERROR(BurstTooLong, 3)
RAUZYLAB_DEFINE_ERROR(DepthExceeded, 3)
RAUZYLAB_DEFINE_ERROR(ReturnCapExceeded, 3)
RAUZYLAB_DEFINE_ERROR(CoverageTooLow, 2)
RAUZYLAB_DEFINE_ERROR(NoConvergence, 3)
RAUZYLAB_DEFINE_ERROR(InsufficientSamples, 2)
RAUZYLAB_DEFINE_ERROR(LadderTooFine, 2)
RAUZYLAB_DEFINE_ERROR(TauOutsideCone, 2)
RAUZYLAB_DEFINE_ERROR(EnNotDivergent, 2)
RAUZYLAB_DEFINE_ERROR(TargetTooSmall, 2)
RAUZYLAB_DEFINE_ERROR(TargetStraddlesStrip, 2)
RAUZYLAB_DEFINE_ERROR(PeriodDetectionFailed, 2)
RAUZYLAB_DEFINE_ERROR(ScalingConditionsFail, 2)
RAUZYLAB_DEFINE_ERROR(ParamOutOfRange, 2)
RAUZYLAB_DEFINE_ERROR(ConfigError, 2)

#undef RAUZYLAB_DEFINE_ERROR

} // namespace rauzylab
