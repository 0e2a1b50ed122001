#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

namespace blochframes {

// Failure classes map onto the CLI exit-code contract:
// configuration problems exit 1, numerical failures exit 3.
enum class ErrorClass { Config, Precondition, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string code, const std::string& message,
          nlohmann::json details = nlohmann::json::object())
        : std::runtime_error(message), cls_(cls), code_(std::move(code)),
          details_(std::move(details)) {}

    ErrorClass error_class() const noexcept { return cls_; }
    const std::string& code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorClass cls_;
    std::string code_;
    nlohmann::json details_;
};

#define BLOCHFRAMES_DEFINE_ERROR(Name, Class)                                        \
    class Name : public Error {                                                      \
    public:                                                                          \
        explicit Name(const std::string& message,                                    \
                      nlohmann::json details = nlohmann::json::object())             \
            : Error(ErrorClass::Class, #Name, message, std::move(details)) {}        \
    }

BLOCHFRAMES_DEFINE_ERROR(ConfigError, Config);
BLOCHFRAMES_DEFINE_ERROR(SingularGenerators, Precondition);
BLOCHFRAMES_DEFINE_ERROR(InvalidArgument, Precondition);
BLOCHFRAMES_DEFINE_ERROR(NotApplicable, Precondition);
BLOCHFRAMES_DEFINE_ERROR(InvalidWindow, Precondition);
BLOCHFRAMES_DEFINE_ERROR(FrameNotOrthonormal, Precondition);
BLOCHFRAMES_DEFINE_ERROR(DimensionMismatch, Precondition);
BLOCHFRAMES_DEFINE_ERROR(WrongSpinDimension, Precondition);
BLOCHFRAMES_DEFINE_ERROR(SymmetryViolation, Precondition);
BLOCHFRAMES_DEFINE_ERROR(ShiftLeavesBasis, Numerical);
BLOCHFRAMES_DEFINE_ERROR(EigensolverFailure, Numerical);
BLOCHFRAMES_DEFINE_ERROR(GapClosed, Numerical);
BLOCHFRAMES_DEFINE_ERROR(ProjectorsTooFar, Numerical);
BLOCHFRAMES_DEFINE_ERROR(PlaquetteSingular, Numerical);
BLOCHFRAMES_DEFINE_ERROR(NoSpectralGap, Numerical);
BLOCHFRAMES_DEFINE_ERROR(HolonomyBranchMismatch, Numerical);
BLOCHFRAMES_DEFINE_ERROR(WindowTruncation, Numerical);

#undef BLOCHFRAMES_DEFINE_ERROR

}  // namespace blochframes
