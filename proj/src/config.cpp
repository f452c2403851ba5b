#include "carnot/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace carnot {

ConfigError::ConfigError(const std::string& source, int line, int col, const std::string& message)
    : InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      line_(line),
      col_(col) {}

namespace {

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'; }

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i;
}

std::size_t trim_end(std::string_view s, std::size_t end) {
    while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return end;
}

// Parses one number at s[i..]; returns false on failure.
bool parse_number(std::string_view s, std::size_t& i, double& out) {
    i = skip_space(s, i);
    if (i < s.size() && s[i] == '+') ++i;
    const char* first = s.data() + i;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    if (ec != std::errc{} || !std::isfinite(out)) return false;
    i += static_cast<std::size_t>(ptr - first);
    return true;
}

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);

        std::size_t i = skip_space(line, 0);
        const std::size_t end = trim_end(line, line.size());
        if (i >= end) continue;

        if (line[i] == '[') {
            if (line[end - 1] != ']')
                throw ConfigError(cfg.source_, line_no, static_cast<int>(end), "section header must end with ']'");
            std::string_view name = line.substr(i + 1, end - i - 2);
            const std::size_t a = skip_space(name, 0), b = trim_end(name, name.size());
            name = a < b ? name.substr(a, b - a) : std::string_view{};
            if (name.empty()) throw ConfigError(cfg.source_, line_no, static_cast<int>(i + 1), "empty section name");
            for (std::size_t k = 0; k < name.size(); ++k)
                if (!is_key_char(name[k]))
                    throw ConfigError(cfg.source_, line_no, static_cast<int>(i + 2 + a + k),
                                      "invalid character in section name");
            section = std::string(name) + ".";
            continue;
        }

        const std::size_t key_start = i;
        while (i < end && is_key_char(line[i])) ++i;
        if (i == key_start)
            throw ConfigError(cfg.source_, line_no, static_cast<int>(key_start + 1), "expected a key");
        const std::string key = section + std::string(line.substr(key_start, i - key_start));
        i = skip_space(line, i);
        if (i >= end || line[i] != '=')
            throw ConfigError(cfg.source_, line_no, static_cast<int>(i + 1), "expected '=' after key '" + key + "'");
        i = skip_space(line, i + 1);
        if (i >= end) throw ConfigError(cfg.source_, line_no, static_cast<int>(i + 1), "missing value for '" + key + "'");
        if (cfg.entries_.count(key))
            throw ConfigError(cfg.source_, line_no, static_cast<int>(key_start + 1),
                              "duplicate key '" + key + "' (first set on line " +
                                  std::to_string(cfg.entries_.at(key).line) + ")");
        std::string value(line.substr(i, end - i));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        cfg.entries_[key] = {value, line_no, static_cast<int>(i + 1), static_cast<int>(key_start + 1)};
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::set(const std::string& key, std::string value) { entries_[key] = {std::move(value), 0, 0, 0}; }

const Config::Entry& Config::at(const std::string& key) const { return entries_.at(key); }

void Config::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) throw InputError(key + ": " + message);
    throw ConfigError(source_, it->second.line, it->second.col, key + ": " + message);
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).value : fallback;
}

double Config::real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = at(key).value;
    std::size_t i = 0;
    double out = 0.0;
    if (!parse_number(v, i, out) || skip_space(v, i) != v.size()) fail(key, "expected a finite number, got '" + v + "'");
    return out;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = at(key).value;
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = at(key).value;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) fail(key, "expected an unsigned integer, got '" + v + "'");
    return out;
}

bool Config::boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = at(key).value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> Config::reals(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    std::string_view v = at(key).value;
    std::size_t i = skip_space(v, 0);
    const bool bracketed = i < v.size() && v[i] == '[';
    if (bracketed) ++i;
    for (;;) {
        double x = 0.0;
        if (!parse_number(v, i, x)) fail(key, "expected a list of numbers");
        out.push_back(x);
        i = skip_space(v, i);
        if (i < v.size() && v[i] == ',') {
            ++i;
            continue;
        }
        break;
    }
    if (bracketed) {
        if (i >= v.size() || v[i] != ']') fail(key, "missing ']' in list");
        ++i;
    }
    if (skip_space(v, i) != v.size()) fail(key, "trailing characters after list");
    return out;
}

std::vector<std::vector<double>> Config::tuples(const std::string& key) const {
    std::vector<std::vector<double>> out;
    if (!has(key)) return out;
    std::string_view v = at(key).value;
    std::size_t i = skip_space(v, 0);
    for (;;) {
        if (i >= v.size() || v[i] != '(') fail(key, "expected '(' to open a tuple");
        ++i;
        std::vector<double> t;
        for (;;) {
            double x = 0.0;
            if (!parse_number(v, i, x)) fail(key, "expected a number inside a tuple");
            t.push_back(x);
            i = skip_space(v, i);
            if (i < v.size() && v[i] == ',') {
                ++i;
                continue;
            }
            break;
        }
        if (i >= v.size() || v[i] != ')') fail(key, "expected ')' to close a tuple");
        out.push_back(std::move(t));
        i = skip_space(v, i + 1);
        if (i < v.size() && v[i] == ',') {
            i = skip_space(v, i + 1);
            continue;
        }
        break;
    }
    if (i != v.size()) fail(key, "trailing characters after tuples");
    return out;
}

void Config::require_known(const std::vector<std::string>& known) const {
    for (const auto& [key, e] : entries_)
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            if (e.line == 0) throw InputError("unknown key '" + key + "'");
            throw ConfigError(source_, e.line, e.key_col, "unknown key '" + key + "'");
        }
}

}  // namespace carnot
