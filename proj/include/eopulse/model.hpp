#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eopulse/config.hpp"
#include "eopulse/errors.hpp"

namespace eopulse::model {

enum class NetworkKind { resistance, rational };
enum class EnvelopeShape { rectangular, gaussian, tabulated };
enum class RunMode { phenomenological, microscopic, both };

/// All quantities SI. The dc-rectification susceptibility chi2_dc (m/V) is
/// the stored value; the electro-optic coefficient used by the index shift is
/// always derived as 4 * chi2_dc, never stored separately.
struct MaterialParams {
    double relative_permittivity = 0.0;
    double refractive_index = 0.0;
    double fill_factor = 0.0;                 // in-gap fraction occupied by the EO medium
    std::optional<double> chi2_dc;            // m/V; required for phenomenological runs
};

struct MicroscopicParams {
    double exciton_energy = 0.0;              // J
    double transition_dipole = 0.0;           // C m (drives the optical coupling)
    double static_dipole = 0.0;               // C m (permanent dipole of the deformed exciton)
    double exciton_density = 0.0;             // 1/m^3
};

struct Geometry {
    double cross_section = 0.0;               // W, m; plate gap and beam width
    double device_length = 0.0;               // L, m; along propagation
};

struct CircuitParams {
    NetworkKind kind = NetworkKind::resistance;
    double resistance = 0.0;                  // ohm; +inf = open circuit
    std::vector<double> impedance_num;        // Z(s) coefficients, ascending
    std::vector<double> impedance_den;
    double bias_field = 0.0;                  // F0, V/m
    std::optional<double> battery_voltage;    // V; default bias_field * cross_section
};

struct PulseSpec {
    EnvelopeShape shape = EnvelopeShape::rectangular;
    double carrier_angular_frequency = 0.0;   // rad/s
    double field_amplitude = 0.0;             // plateau envelope E, V/m
    double plateau_duration = 0.0;            // T, s (FWHM of E^2 for gaussian)
    double transient_duration = 0.0;          // T_tr, s; 0 = idealized rectangular
    std::string table_path;                   // tabulated shape only
};

struct NumericsSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t output_points = 4001;         // budget across all output segments
    double max_step = 0.0;                    // 0 = automatic
    double tail_factor = 10.0;                // minimum tail length in relaxation times
    double tail_decay_target = 1e-6;          // sigma1 must decay to this fraction of peak
    double max_tail_time = 0.0;               // 0 = automatic cap
    double regime_margin = 10.0;              // separation factor for regime warnings
    double adiabatic_threshold = 100.0;
    bool export_spectrum = false;
};

struct Thresholds {
    double residual_energy = 1e-6;
    double residual_battery = 1e-10;
    double photon = 1e-9;
};

struct Derived {
    double eps = 0.0;                         // absolute permittivity, F/m
    double capacitance = 0.0;                 // C0 = eps * L, F
    double tau = 0.0;                         // C0 * R for the resistance kind, s
    double sigma0 = 0.0;                      // eps * F0, C/m^2
    double chi2_eo = 0.0;                     // 4 * chi2_dc (NaN if chi2_dc absent)
    double intensity = 0.0;                   // eps0 c n E^2 / 2, W/m^2
    double battery_voltage = 0.0;             // resolved V0
    double detuning = 0.0;                    // eps_x - hbar*omega (NaN if no microscopic)
};

struct Issue {
    ErrorCode code;
    std::string field;
    std::string message;
};

struct Model {
    MaterialParams material;
    std::optional<MicroscopicParams> microscopic;
    Geometry geometry;
    CircuitParams circuit;
    PulseSpec pulse;
    NumericsSpec numerics;
    Thresholds thresholds;
    Derived derived;
    std::vector<std::string> regime_warnings;

    bool open_circuit() const;
    /// Throws MISSING_FIELD unless the parameters the mode needs are present.
    void require_mode(RunMode mode) const;
};

struct BuildResult {
    std::optional<Model> model;
    std::vector<Issue> errors;
    std::vector<std::string> warnings;
};

/// Collects every validation error (not just the first) so the CLI can report
/// all offending fields in one pass.
BuildResult build_model(const config::RawConfig& raw);

/// Convenience for tests and sweeps: throws the first error.
Model require_model(const config::RawConfig& raw);

RunMode parse_mode(const std::string& text);
const char* to_string(RunMode mode);

} // namespace eopulse::model
