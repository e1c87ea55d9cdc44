#include "eopulse/config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "eopulse/errors.hpp"

namespace eopulse::config {

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"material",
         {"relative_permittivity", "refractive_index", "chi2_dc", "fill_factor"}},
        {"microscopic",
         {"exciton_energy", "transition_dipole", "static_dipole", "exciton_density"}},
        {"geometry", {"cross_section", "device_length"}},
        {"circuit",
         {"kind", "resistance", "impedance_num", "impedance_den", "bias_field",
          "battery_voltage"}},
        {"pulse",
         {"shape", "carrier_angular_frequency", "field_amplitude",
          "plateau_duration", "transient_duration", "table_path"}},
        {"numerics",
         {"rel_tol", "abs_tol", "output_points", "max_step", "tail_factor",
          "tail_decay_target", "max_tail_time", "regime_margin",
          "adiabatic_threshold", "export_spectrum"}},
        {"thresholds", {"residual_energy", "residual_battery", "photon"}},
        {"sweep", {"parameter", "scale", "points", "min", "max", "probe_time"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

bool is_known_section(const std::string& section) {
    return schema().count(section) != 0;
}

bool is_known_key(const std::string& section, const std::string& key) {
    const auto it = schema().find(section);
    if (it == schema().end()) return false;
    for (const auto& k : it->second)
        if (k == key) return true;
    return false;
}

bool RawConfig::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const std::string* RawConfig::find(const std::string& section,
                                   const std::string& key) const {
    const auto sit = sections.find(section);
    if (sit == sections.end()) return nullptr;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    return &kit->second;
}

void RawConfig::set(const std::string& section, const std::string& key,
                    const std::string& value) {
    if (!is_known_key(section, key))
        throw SimError(ErrorCode::UnknownKey, section + "." + key,
                       "unknown config key");
    sections[section][key] = value;
}

RawConfig parse_config_text(const std::string& text) {
    RawConfig cfg;
    cfg.source_text = text;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw SimError(ErrorCode::BadValue, "line " + std::to_string(lineno),
                               "malformed section header: " + line);
            section = trim(line.substr(1, line.size() - 2));
            if (!is_known_section(section))
                throw SimError(ErrorCode::UnknownKey, section,
                               "unknown config section [" + section + "]");
            cfg.sections[section]; // record even if empty
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SimError(ErrorCode::BadValue, "line " + std::to_string(lineno),
                           "expected key = value: " + line);
        if (section.empty())
            throw SimError(ErrorCode::BadValue, "line " + std::to_string(lineno),
                           "key outside any [section]: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_known_key(section, key))
            throw SimError(ErrorCode::UnknownKey, section + "." + key,
                           "unknown config key");
        if (cfg.sections[section].count(key))
            throw SimError(ErrorCode::BadValue, section + "." + key,
                           "duplicate config key");
        cfg.sections[section][key] = value;
    }
    return cfg;
}

RawConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SimError(ErrorCode::IoError, path, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    RawConfig cfg = parse_config_text(buf.str());
    // Relative table paths resolve against the config file, not the cwd.
    if (const std::string* tp = cfg.find("pulse", "table_path")) {
        const std::filesystem::path p(*tp);
        if (p.is_relative()) {
            const std::filesystem::path base =
                std::filesystem::path(path).parent_path();
            cfg.sections["pulse"]["table_path"] = (base / p).string();
        }
    }
    return cfg;
}

double parse_double(const std::string& value, const std::string& path) {
    const std::string v = trim(value);
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw SimError(ErrorCode::BadValue, path, "not a number: '" + value + "'");
    return d;
}

bool parse_bool(const std::string& value, const std::string& path) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw SimError(ErrorCode::BadValue, path, "not a boolean: '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& path) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok)
        out.push_back(parse_double(tok, path));
    if (out.empty())
        throw SimError(ErrorCode::BadValue, path, "empty list");
    return out;
}

} // namespace eopulse::config
