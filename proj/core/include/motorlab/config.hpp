#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "motorlab/plant.hpp"

namespace motorlab {

/// Configuration problem tied to a specific key (or file).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Flat `key = value` configuration. `#` starts a comment; blank lines are ignored.
/// Keys are case-sensitive. Later duplicates override earlier ones.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::string_view text, const std::string& origin = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    [[nodiscard]] bool contains(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;

    [[nodiscard]] double require_double(const std::string& key) const;
    [[nodiscard]] int require_int(const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] int get_int(const std::string& key, int fallback) const;
    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    /// Canonical `key=value\n` rendering in key order; stable input for hashing.
    [[nodiscard]] std::string canonical() const;

    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Reads every MotorParams key (R, Ld, Lq, Phi, P, J, D, Vmax, Imax, Pmax, fmin, fmax, TLmin, TLmax).
/// All keys are required; a missing key raises ConfigError naming it.
MotorParams motor_params_from_config(const KeyValueConfig& cfg);

void motor_params_to_config(const MotorParams& params, KeyValueConfig& cfg);

/// 64-bit FNV-1a; used for config and checkpoint fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace motorlab
