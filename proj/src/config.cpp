#include "nlsob/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlsob {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key)
{
    if (key.empty() || key.front() == '.' || key.back() == '.') {
        return false;
    }
    return std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected)
{
    throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'", key);
}

double parse_double(const std::string& key, std::string_view token)
{
    const std::string s(trim(token));
    if (s == "inf" || s == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v)) {
        bad_value(key, s, "a number");
    }
    return v;
}

long long parse_integer(const std::string& key, std::string_view token)
{
    const std::string_view s = trim(token);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        bad_value(key, std::string(s), "an integer");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

} // namespace

Config Config::parse(std::string_view text, const std::string& source)
{
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            const std::string key(trim(line));
            throw ConfigError(where + ": expected 'key = value' for key '" + key + "'", key);
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (!valid_key(key)) {
            throw ConfigError(where + ": malformed key '" + key + "'", key);
        }
        if (value.empty()) {
            throw ConfigError(where + ": key '" + key + "' has no value", key);
        }
        if (cfg.entries_.count(key) != 0) {
            throw ConfigError(where + ": key '" + key + "' given twice", key);
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParameterError("cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

const std::string* Config::find(const std::string& key) const
{
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string Config::text(const std::string& key, const std::string& fallback) const
{
    const auto* v = find(key);
    return v ? *v : fallback;
}

double Config::number(const std::string& key, double fallback) const
{
    const auto* v = find(key);
    return v ? parse_double(key, *v) : fallback;
}

std::optional<double> Config::number(const std::string& key) const
{
    const auto* v = find(key);
    if (!v) {
        return std::nullopt;
    }
    return parse_double(key, *v);
}

int Config::integer(const std::string& key, int fallback) const
{
    const auto* v = find(key);
    if (!v) {
        return fallback;
    }
    const long long n = parse_integer(key, *v);
    if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
        bad_value(key, *v, "an integer in range");
    }
    return static_cast<int>(n);
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const
{
    const auto* v = find(key);
    if (!v) {
        return fallback;
    }
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
        bad_value(key, *v, "an unsigned 64-bit integer");
    }
    return n;
}

bool Config::flag(const std::string& key, bool fallback) const
{
    const auto* v = find(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") {
        return true;
    }
    if (*v == "false" || *v == "no" || *v == "off" || *v == "0") {
        return false;
    }
    bad_value(key, *v, "true or false");
}

std::vector<double> Config::numbers(const std::string& key, std::vector<double> fallback) const
{
    const auto* v = find(key);
    if (!v) {
        return fallback;
    }
    std::vector<double> out;
    for (auto token : split(*v)) {
        out.push_back(parse_double(key, token));
    }
    return out;
}

std::vector<int> Config::integers(const std::string& key, std::vector<int> fallback) const
{
    const auto* v = find(key);
    if (!v) {
        return fallback;
    }
    std::vector<int> out;
    for (auto token : split(*v)) {
        const long long n = parse_integer(key, token);
        if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
            bad_value(key, std::string(token), "an integer in range");
        }
        out.push_back(static_cast<int>(n));
    }
    return out;
}

void Config::reject_unknown(std::span<const std::string_view> known) const
{
    for (const auto& [key, value] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config key '" + key + "'", key);
        }
    }
}

} // namespace nlsob
