#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace contextua {

enum class ErrorCode {
    ContextNotInCover,
    NotSubcontext,
    IncompatibleProtocols,
    ProtocolMismatch,
    DimensionMismatch,
    NonScalarRatio,
    OutcomeLabelMismatch,
    AmplitudeCapExceeded,
    SearchSpaceTooLarge,
    InvalidFixedSetting,
    ClosureTooLarge,
    ActionNotFree,
    NotActionHomomorphism,
    NoSection,
    CoverDisconnected,
    MixedOutcomeAlphabets,
    NotAffine,
    ScenarioMismatch,
    DeclarationInconsistent,
    LabelCollision,
    UnstructuredSetting,
    CyclicGraph,
    SeedSpaceTooLarge,
    PreconditionViolated,
    HypothesisUnmet,
    InvalidArgument,
    SchemaViolation,
    ConfigInvalid,
    ExperimentFailed,
    Internal,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace contextua
