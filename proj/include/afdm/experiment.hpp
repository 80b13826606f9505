// experiment.hpp - declarative experiment runner behind the CLI
//
// Configs are flat `key = value` text ('#' comments). Every getter records
// the effective value, unknown keys are rejected, and each run writes an
// echo file that is itself a valid config reproducing the run.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace afdm {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    // CLI --set overrides, applied after file parsing.
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    long long get_llong(const std::string& key, long long fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_double_list(const std::string& key,
                                        const std::string& fallback_csv);
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::string& fallback_csv);

    // Keep a key out of the echo permanently (execution knobs like threads
    // must not affect output bytes).
    void drop_from_echo(const std::string& key) {
        effective_.erase(key);
        ephemeral_.insert(key);
    }

    // Throws ConfigError if any provided key was never consumed.
    void finish() const;

    const std::map<std::string, std::string>& effective() const { return effective_; }

private:
    std::string take(const std::string& key, const std::string& fallback);
    std::set<std::string> ephemeral_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, bool> consumed_;
    std::map<std::string, std::string> effective_;
};

// kind: ber | af | af-expected | crb | mf | dechirp | fullduplex | selftest.
// Returns the process exit code (0 ok; throws ConfigError for bad configs,
// std::invalid_argument for runtime rejections).
int run_experiment(const std::string& kind, KeyValueConfig& cfg,
                   const std::string& out_dir, std::ostream& log);

int run_selftest(std::ostream& log, int threads);

}  // namespace afdm
