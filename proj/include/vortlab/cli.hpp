#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vortlab/dynamics.hpp"

namespace vortlab {

/// Plain-text run configuration: `key = value` lines, '#' comments. Every
/// key must be consumed by the subcommand; leftovers are usage errors.
class RunConfig {
public:
    static RunConfig from_string(const std::string& text);
    static RunConfig from_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string require_str(const std::string& key);
    double require_double(const std::string& key);
    long require_int(const std::string& key);
    std::string get_str(const std::string& key, std::string def);
    double get_double(const std::string& key, double def);
    long get_int(const std::string& key, long def);
    bool get_bool(const std::string& key, bool def);
    std::vector<Mode> get_modes(const std::string& key, std::vector<Mode> def);

    /// Throws listing any key that was never consumed.
    void reject_unknown() const;

    /// Resolved key/value view (requested keys with their effective values).
    const std::map<std::string, std::string>& resolved() const { return resolved_; }

private:
    std::map<std::string, std::string> kv_;
    std::map<std::string, bool> consumed_;
    std::map<std::string, std::string> resolved_;
    std::optional<std::string> raw(const std::string& key);
    void note(const std::string& key, const std::string& value);
};

/// Exit codes: 0 all checks pass, 1 a requested check failed, 2 usage error,
/// 3 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace vortlab
