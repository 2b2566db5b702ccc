#pragma once

// Flat experiment configuration: one `key = value` per line, dotted section
// prefixes (`kernel.shape = band`), `#` starts a comment. Lists are comma
// separated.

#include "nlsob/errors.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlsob {

/// A malformed entry. key() names the offending key (empty for syntax errors
/// that precede the key).
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& what, std::string key)
        : ParameterError(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    std::optional<double> number(const std::string& key) const;
    int integer(const std::string& key, int fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
    std::vector<int> integers(const std::string& key, std::vector<int> fallback) const;

    /// Throws ConfigError naming the first key not in `known`.
    void reject_unknown(std::span<const std::string_view> known) const;

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> entries_;
};

} // namespace nlsob
