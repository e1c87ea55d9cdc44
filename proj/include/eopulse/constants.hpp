#pragma once

/// CODATA 2018 values. Single source for every physical constant in the
/// library; nothing else may redefine or override these.
namespace eopulse::constants {

inline constexpr double speed_of_light = 299792458.0;       // m/s (exact)
inline constexpr double hbar           = 1.054571817e-34;   // J s
inline constexpr double eps0           = 8.8541878128e-12;  // F/m
inline constexpr double elementary_q   = 1.602176634e-19;   // C (exact)
inline constexpr double pi             = 3.14159265358979323846;

} // namespace eopulse::constants
