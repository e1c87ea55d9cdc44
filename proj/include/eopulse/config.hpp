#pragma once

#include <map>
#include <string>
#include <vector>

namespace eopulse::config {

/// Parsed section/key/value view of a config file. Values stay as raw
/// strings; typed access and range validation happen in model.cpp.
struct RawConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string source_text; // byte-exact snapshot for the run manifest

    bool has(const std::string& section, const std::string& key) const;
    const std::string* find(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

/// Parses "[section]\nkey = value" text with '#'/';' comments. Unknown
/// sections or keys are hard errors naming the offending path.
RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

/// Schema lookup used by the parser and by sweep-parameter validation.
bool is_known_section(const std::string& section);
bool is_known_key(const std::string& section, const std::string& key);

double parse_double(const std::string& value, const std::string& path);
bool parse_bool(const std::string& value, const std::string& path);
std::vector<double> parse_double_list(const std::string& value, const std::string& path);

} // namespace eopulse::config
