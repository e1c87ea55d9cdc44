#pragma once

#include <stdexcept>
#include <string>

namespace eopulse {

enum class ErrorCode {
    NegativeParameter,
    ZeroGeometry,
    MissingField,
    UnknownKey,
    BadValue,
    UnsupportedNetwork,
    StepTooCoarse,
    UnstableNetwork,
    ImproperImpedance,
    DegenerateDenominator,
    GridMismatch,
    TruncatedTail,
    ZeroDetuning,
    NonquadraticResponse,
    InconsistentRunIds,
    IoError,
};

const char* to_string(ErrorCode code);

/// Carries a machine-readable code plus the config field path (when one is
/// implicated) so the CLI can print "CODE field: message" lines.
class SimError : public std::runtime_error {
  public:
    SimError(ErrorCode code, std::string field, const std::string& message)
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const { return code_; }
    const std::string& field() const { return field_; }

  private:
    ErrorCode code_;
    std::string field_;
};

} // namespace eopulse
