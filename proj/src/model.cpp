#include "eopulse/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "eopulse/constants.hpp"
#include "eopulse/network.hpp"

namespace eopulse::model {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Collector {
  public:
    explicit Collector(const config::RawConfig& raw) : raw_(raw) {}

    std::vector<Issue>& errors() { return errors_; }

    void error(ErrorCode code, const std::string& field, const std::string& msg) {
        errors_.push_back({code, field, msg});
    }

    bool has(const std::string& section, const std::string& key) const {
        return raw_.has(section, key);
    }

    /// Required double; records MISSING_FIELD / BAD_VALUE and returns NaN on failure.
    double need(const std::string& section, const std::string& key) {
        const std::string* v = raw_.find(section, key);
        const std::string path = section + "." + key;
        if (!v) {
            error(ErrorCode::MissingField, path, "required field is missing");
            return kNaN;
        }
        return number(*v, path);
    }

    double optional(const std::string& section, const std::string& key,
                    double fallback) {
        const std::string* v = raw_.find(section, key);
        if (!v) return fallback;
        return number(*v, section + "." + key);
    }

    std::string text(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
        const std::string* v = raw_.find(section, key);
        return v ? *v : fallback;
    }

    /// value > 0 required; emits NEGATIVE_PARAMETER for < 0 and the supplied
    /// code (default BAD_VALUE) for == 0.
    void positive(double value, const std::string& path,
                  ErrorCode zero_code = ErrorCode::BadValue) {
        if (std::isnan(value)) return; // already reported
        if (value < 0.0)
            error(ErrorCode::NegativeParameter, path, "must be positive");
        else if (value == 0.0)
            error(zero_code, path, "must be nonzero");
    }

    void nonnegative(double value, const std::string& path) {
        if (std::isnan(value)) return;
        if (value < 0.0)
            error(ErrorCode::NegativeParameter, path, "must be nonnegative");
    }

  private:
    double number(const std::string& v, const std::string& path) {
        try {
            return config::parse_double(v, path);
        } catch (const SimError& e) {
            errors_.push_back({e.code(), e.field(), e.what()});
            return kNaN;
        }
    }

    const config::RawConfig& raw_;
    std::vector<Issue> errors_;
};

std::string ratio_warning(const std::string& what, double ratio, double margin) {
    std::ostringstream os;
    os << "REGIME " << what << " (separation " << ratio << "x, need >= " << margin
       << "x)";
    return os.str();
}

} // namespace

bool Model::open_circuit() const {
    return circuit.kind == NetworkKind::resistance &&
           std::isinf(circuit.resistance);
}

void Model::require_mode(RunMode mode) const {
    const bool needs_micro = mode != RunMode::phenomenological;
    const bool needs_chi2 = mode != RunMode::microscopic;
    if (needs_micro && !microscopic)
        throw SimError(ErrorCode::MissingField, "microscopic",
                       "run mode requires the [microscopic] section");
    if (needs_chi2 && !material.chi2_dc)
        throw SimError(ErrorCode::MissingField, "material.chi2_dc",
                       "phenomenological run requires material.chi2_dc");
}

RunMode parse_mode(const std::string& text) {
    if (text == "phenomenological") return RunMode::phenomenological;
    if (text == "microscopic") return RunMode::microscopic;
    if (text == "both") return RunMode::both;
    throw SimError(ErrorCode::BadValue, "--mode",
                   "expected phenomenological|microscopic|both, got '" + text + "'");
}

const char* to_string(RunMode mode) {
    switch (mode) {
        case RunMode::phenomenological: return "phenomenological";
        case RunMode::microscopic: return "microscopic";
        case RunMode::both: return "both";
    }
    return "?";
}

BuildResult build_model(const config::RawConfig& raw) {
    namespace k = eopulse::constants;
    Collector c(raw);
    Model m;

    // --- material ---
    m.material.relative_permittivity = c.need("material", "relative_permittivity");
    m.material.refractive_index = c.need("material", "refractive_index");
    m.material.fill_factor = c.need("material", "fill_factor");
    if (c.has("material", "chi2_dc"))
        m.material.chi2_dc = c.optional("material", "chi2_dc", kNaN);
    if (!std::isnan(m.material.relative_permittivity) &&
        m.material.relative_permittivity < 1.0)
        c.error(ErrorCode::BadValue, "material.relative_permittivity",
                "must be >= 1");
    if (!std::isnan(m.material.refractive_index) &&
        m.material.refractive_index < 1.0)
        c.error(ErrorCode::BadValue, "material.refractive_index", "must be >= 1");
    if (!std::isnan(m.material.fill_factor) &&
        (m.material.fill_factor <= 0.0 || m.material.fill_factor > 1.0))
        c.error(ErrorCode::BadValue, "material.fill_factor", "must be in (0, 1]");

    // --- microscopic (optional section) ---
    if (raw.sections.count("microscopic")) {
        MicroscopicParams mp;
        mp.exciton_energy = c.need("microscopic", "exciton_energy");
        mp.transition_dipole = c.need("microscopic", "transition_dipole");
        mp.static_dipole = c.need("microscopic", "static_dipole");
        mp.exciton_density = c.need("microscopic", "exciton_density");
        c.positive(mp.exciton_energy, "microscopic.exciton_energy");
        c.positive(mp.transition_dipole, "microscopic.transition_dipole");
        c.positive(mp.static_dipole, "microscopic.static_dipole");
        c.positive(mp.exciton_density, "microscopic.exciton_density");
        m.microscopic = mp;
    }

    // --- geometry ---
    m.geometry.cross_section = c.need("geometry", "cross_section");
    m.geometry.device_length = c.need("geometry", "device_length");
    c.positive(m.geometry.cross_section, "geometry.cross_section",
               ErrorCode::ZeroGeometry);
    c.positive(m.geometry.device_length, "geometry.device_length",
               ErrorCode::ZeroGeometry);

    // --- circuit ---
    {
        const std::string kind = c.text("circuit", "kind", "resistance");
        if (kind == "resistance") {
            m.circuit.kind = NetworkKind::resistance;
            m.circuit.resistance = c.need("circuit", "resistance");
            c.positive(m.circuit.resistance, "circuit.resistance");
        } else if (kind == "rational") {
            m.circuit.kind = NetworkKind::rational;
            m.circuit.resistance = kNaN;
            const std::string* num = raw.find("circuit", "impedance_num");
            const std::string* den = raw.find("circuit", "impedance_den");
            if (!num)
                c.error(ErrorCode::MissingField, "circuit.impedance_num",
                        "required for kind = rational");
            if (!den)
                c.error(ErrorCode::MissingField, "circuit.impedance_den",
                        "required for kind = rational");
            try {
                if (num)
                    m.circuit.impedance_num =
                        config::parse_double_list(*num, "circuit.impedance_num");
                if (den)
                    m.circuit.impedance_den =
                        config::parse_double_list(*den, "circuit.impedance_den");
            } catch (const SimError& e) {
                c.error(e.code(), e.field(), e.what());
            }
        } else {
            c.error(ErrorCode::UnsupportedNetwork, "circuit.kind",
                    "expected resistance|rational, got '" + kind + "'");
        }
        m.circuit.bias_field = c.need("circuit", "bias_field");
        c.positive(m.circuit.bias_field, "circuit.bias_field");
        if (c.has("circuit", "battery_voltage"))
            m.circuit.battery_voltage = c.optional("circuit", "battery_voltage", kNaN);
    }

    // --- pulse ---
    {
        const std::string shape = c.text("pulse", "shape", "rectangular");
        if (shape == "rectangular")
            m.pulse.shape = EnvelopeShape::rectangular;
        else if (shape == "gaussian")
            m.pulse.shape = EnvelopeShape::gaussian;
        else if (shape == "tabulated")
            m.pulse.shape = EnvelopeShape::tabulated;
        else
            c.error(ErrorCode::BadValue, "pulse.shape",
                    "expected rectangular|gaussian|tabulated, got '" + shape + "'");

        m.pulse.carrier_angular_frequency =
            c.need("pulse", "carrier_angular_frequency");
        c.positive(m.pulse.carrier_angular_frequency,
                   "pulse.carrier_angular_frequency");

        if (m.pulse.shape == EnvelopeShape::tabulated) {
            m.pulse.table_path = c.text("pulse", "table_path", "");
            if (m.pulse.table_path.empty())
                c.error(ErrorCode::MissingField, "pulse.table_path",
                        "required for shape = tabulated");
            m.pulse.field_amplitude = c.optional("pulse", "field_amplitude", 0.0);
            m.pulse.plateau_duration = c.optional("pulse", "plateau_duration", 0.0);
            m.pulse.transient_duration =
                c.optional("pulse", "transient_duration", 0.0);
        } else {
            m.pulse.field_amplitude = c.need("pulse", "field_amplitude");
            c.nonnegative(m.pulse.field_amplitude, "pulse.field_amplitude");
            m.pulse.plateau_duration = c.need("pulse", "plateau_duration");
            c.positive(m.pulse.plateau_duration, "pulse.plateau_duration");
            m.pulse.transient_duration =
                c.optional("pulse", "transient_duration",
                           m.pulse.shape == EnvelopeShape::rectangular ? kNaN : 0.0);
            if (m.pulse.shape == EnvelopeShape::rectangular &&
                std::isnan(m.pulse.transient_duration))
                c.error(ErrorCode::MissingField, "pulse.transient_duration",
                        "required for shape = rectangular (0 = ideal edges)");
            c.nonnegative(m.pulse.transient_duration, "pulse.transient_duration");
        }
    }

    // --- numerics ---
    {
        NumericsSpec& n = m.numerics;
        n.rel_tol = c.optional("numerics", "rel_tol", n.rel_tol);
        n.abs_tol = c.optional("numerics", "abs_tol", n.abs_tol);
        const double pts =
            c.optional("numerics", "output_points", static_cast<double>(n.output_points));
        if (!std::isnan(pts)) {
            if (pts < 101.0 || pts > 5e7)
                c.error(ErrorCode::BadValue, "numerics.output_points",
                        "must be in [101, 5e7]");
            else
                n.output_points = static_cast<std::size_t>(pts);
        }
        n.max_step = c.optional("numerics", "max_step", n.max_step);
        n.tail_factor = c.optional("numerics", "tail_factor", n.tail_factor);
        n.tail_decay_target =
            c.optional("numerics", "tail_decay_target", n.tail_decay_target);
        n.max_tail_time = c.optional("numerics", "max_tail_time", n.max_tail_time);
        n.regime_margin = c.optional("numerics", "regime_margin", n.regime_margin);
        n.adiabatic_threshold =
            c.optional("numerics", "adiabatic_threshold", n.adiabatic_threshold);
        if (raw.has("numerics", "export_spectrum")) {
            try {
                n.export_spectrum = config::parse_bool(
                    *raw.find("numerics", "export_spectrum"), "numerics.export_spectrum");
            } catch (const SimError& e) {
                c.error(e.code(), e.field(), e.what());
            }
        }
        c.positive(n.rel_tol, "numerics.rel_tol");
        c.positive(n.abs_tol, "numerics.abs_tol");
        c.nonnegative(n.max_step, "numerics.max_step");
        if (!std::isnan(n.tail_factor) && n.tail_factor < 1.0)
            c.error(ErrorCode::BadValue, "numerics.tail_factor", "must be >= 1");
        if (!std::isnan(n.tail_decay_target) &&
            (n.tail_decay_target <= 0.0 || n.tail_decay_target > 1e-2))
            c.error(ErrorCode::BadValue, "numerics.tail_decay_target",
                    "must be in (0, 1e-2]");
        c.nonnegative(n.max_tail_time, "numerics.max_tail_time");
        if (!std::isnan(n.regime_margin) && n.regime_margin < 1.0)
            c.error(ErrorCode::BadValue, "numerics.regime_margin", "must be >= 1");
        c.positive(n.adiabatic_threshold, "numerics.adiabatic_threshold");
    }

    // --- thresholds ---
    m.thresholds.residual_energy =
        c.optional("thresholds", "residual_energy", m.thresholds.residual_energy);
    m.thresholds.residual_battery =
        c.optional("thresholds", "residual_battery", m.thresholds.residual_battery);
    m.thresholds.photon = c.optional("thresholds", "photon", m.thresholds.photon);
    c.positive(m.thresholds.residual_energy, "thresholds.residual_energy");
    c.positive(m.thresholds.residual_battery, "thresholds.residual_battery");
    c.positive(m.thresholds.photon, "thresholds.photon");

    if (!c.errors().empty())
        return {std::nullopt, std::move(c.errors()), {}};

    // --- derived quantities ---
    Derived& d = m.derived;
    d.eps = m.material.relative_permittivity * k::eps0;
    d.capacitance = d.eps * m.geometry.device_length;
    d.tau = m.circuit.kind == NetworkKind::resistance
                ? d.capacitance * m.circuit.resistance
                : kNaN;
    d.sigma0 = d.eps * m.circuit.bias_field;
    d.chi2_eo = m.material.chi2_dc ? 4.0 * *m.material.chi2_dc : kNaN;
    d.intensity = 0.5 * k::eps0 * k::speed_of_light * m.material.refractive_index *
                  m.pulse.field_amplitude * m.pulse.field_amplitude;
    d.battery_voltage = m.circuit.battery_voltage
                            ? *m.circuit.battery_voltage
                            : m.circuit.bias_field * m.geometry.cross_section;
    d.detuning = m.microscopic
                     ? m.microscopic->exciton_energy -
                           k::hbar * m.pulse.carrier_angular_frequency
                     : kNaN;

    if (m.microscopic && d.detuning <= 0.0)
        return {std::nullopt,
                {{ErrorCode::ZeroDetuning, "microscopic.exciton_energy",
                  "detuning eps_x - hbar*omega must be positive (below-resonance drive)"}},
                {}};

    // --- regime separation warnings (never errors) ---
    {
        const double margin = m.numerics.regime_margin;
        const double T = m.pulse.plateau_duration;
        const double Ttr = m.pulse.transient_duration;
        const double L = m.geometry.device_length;
        const double c_over_n = k::speed_of_light / m.material.refractive_index;

        double relax = d.tau; // slowest relaxation scale of the loop
        if (m.circuit.kind == NetworkKind::rational) {
            try {
                const network::Realization r = network::realize_impedance(
                    {m.circuit.impedance_num, m.circuit.impedance_den});
                relax = r.slowest_time_constant();
                // Direct feedthrough D discharges the device with constant C0/D.
                if (r.D > 0.0) relax = std::max(relax, d.capacitance / r.D);
            } catch (const SimError&) {
                relax = kNaN; // surfaced later by integrate_circuit
            }
        }

        if (m.pulse.shape != EnvelopeShape::tabulated && Ttr > 0.0) {
            if (!std::isnan(relax) && relax / Ttr < margin)
                m.regime_warnings.push_back(ratio_warning(
                    "transient_duration not well below the circuit relaxation time",
                    relax / Ttr, margin));
            if (T / Ttr < margin)
                m.regime_warnings.push_back(ratio_warning(
                    "transient_duration not well below the plateau duration",
                    T / Ttr, margin));
        }
        if (m.pulse.shape != EnvelopeShape::tabulated && T > 0.0 &&
            (c_over_n * T) / L < margin)
            m.regime_warnings.push_back(ratio_warning(
                "device length not well below the pulse spatial extent c*T/n",
                (c_over_n * T) / L, margin));
        if (!std::isnan(relax) && relax > 0.0 && (c_over_n * relax) / L < margin)
            m.regime_warnings.push_back(ratio_warning(
                "device length not well below c/n times the relaxation time",
                (c_over_n * relax) / L, margin));
    }

    std::vector<std::string> warnings = m.regime_warnings;
    return {std::move(m), {}, std::move(warnings)};
}

Model require_model(const config::RawConfig& raw) {
    BuildResult r = build_model(raw);
    if (!r.model) {
        const Issue& first = r.errors.front();
        throw SimError(first.code, first.field, first.message);
    }
    return std::move(*r.model);
}

} // namespace eopulse::model
