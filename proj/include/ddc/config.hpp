#pragma once

// Flat key-value run configuration: one `key = value` per line, `#` comments,
// sections introduced by `[name]` headers. Values are kept as verbatim
// strings so the canonical emission round-trips losslessly.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddc {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& msg, int line_no)
        : std::runtime_error("config line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct ConfigKeyDoc {
    std::string section;
    std::string key;
    std::string default_value;   // empty string means optional / unset
    std::string description;
};

// The recognized keys with defaults; single source for parsing validation,
// value lookup and the generated reference page.
const std::vector<ConfigKeyDoc>& config_key_table();

std::string config_reference_page();

class Config {
  public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    // unknown (section, key) pairs are rejected at parse time; lookups fall
    // back to the table default
    std::string get(const std::string& section, const std::string& key) const;
    bool has(const std::string& section, const std::string& key) const;   // set or nonempty default

    double get_double(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    // canonical serialization: sections and keys sorted, `key = value` lines
    std::string emit() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return data_; }

  private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

} // namespace ddc
