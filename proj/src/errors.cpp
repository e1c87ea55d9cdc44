#include "eopulse/errors.hpp"

namespace eopulse {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NegativeParameter:     return "NEGATIVE_PARAMETER";
        case ErrorCode::ZeroGeometry:          return "ZERO_GEOMETRY";
        case ErrorCode::MissingField:          return "MISSING_FIELD";
        case ErrorCode::UnknownKey:            return "UNKNOWN_KEY";
        case ErrorCode::BadValue:              return "BAD_VALUE";
        case ErrorCode::UnsupportedNetwork:    return "UNSUPPORTED_NETWORK";
        case ErrorCode::StepTooCoarse:         return "STEP_TOO_COARSE";
        case ErrorCode::UnstableNetwork:       return "UNSTABLE_NETWORK";
        case ErrorCode::ImproperImpedance:     return "IMPROPER_IMPEDANCE";
        case ErrorCode::DegenerateDenominator: return "DEGENERATE_DENOMINATOR";
        case ErrorCode::GridMismatch:          return "GRID_MISMATCH";
        case ErrorCode::TruncatedTail:         return "TRUNCATED_TAIL";
        case ErrorCode::ZeroDetuning:          return "ZERO_DETUNING";
        case ErrorCode::NonquadraticResponse:  return "NONQUADRATIC_RESPONSE";
        case ErrorCode::InconsistentRunIds:    return "INCONSISTENT_RUN_IDS";
        case ErrorCode::IoError:               return "IO_ERROR";
    }
    return "UNKNOWN_ERROR";
}

} // namespace eopulse
