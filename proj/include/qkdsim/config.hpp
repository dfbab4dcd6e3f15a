#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/bb84.hpp"
#include "qkdsim/link.hpp"

namespace qkdsim::config {

/// Configuration failure carrying the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Flat `key = value` file with dotted section paths and `#` comments.
/// `--set key=value` overrides land here before typed parsing.
class KeyValues {
public:
    static KeyValues from_file(const std::string& path);
    static KeyValues from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& assignment);  // "key=value"

    bool has(const std::string& key) const;

    double get_double(const std::string& key, double fallback);
    long long get_int(const std::string& key, long long fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback);

    /// Keys present but never read by a typed getter; non-empty means a typo.
    std::vector<std::string> unknown_keys() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

/// Everything a run needs: the physical chain plus scan parameters.
struct RunConfig {
    link::LinkConfig link;
    link::ScanRange scan;
    double scan_duration_s = 10.0;
    bool scramble_per_pulse = true;
    // differential arm retardance behind each MZI's Jones pair, kept for echo
    double alice_birefringence_rad = 0.0;
    double bob_birefringence_rad = 0.0;

    /// Parses and validates; throws ConfigError with the key path on any
    /// violation. Scan range defaults to two fringe periods starting at
    /// Alice's reference temperature.
    static RunConfig from_keyvalues(KeyValues& kv);

    /// Canonical key=value echo of every settable parameter, in key order.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

}  // namespace qkdsim::config
