#pragma once
//
// Line-oriented `key = value` experiment configs. Keys are dotted; a
// `[section]` line prefixes the keys that follow with `section.`.
// `#` starts a comment.
//
//     group.preset = heisenberg
//     [graph]
//     family = gauss
//     A = 1.0
//

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "carnot/error.hpp"

namespace carnot {

/// Input error carrying a source position; what() reads "source:line:col: message".
class ConfigError : public InputError {
public:
    ConfigError(const std::string& source, int line, int col, const std::string& message);
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
        int col = 0;      ///< column of the value's first character
        int key_col = 0;
    };

    static Config parse(std::string_view text, std::string source = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    /// Adds or replaces a value (command-line overrides).
    void set(const std::string& key, std::string value);
    const std::map<std::string, Entry>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

    std::string str(const std::string& key, const std::string& fallback) const;
    double real(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    /// `[a, b, c]` or `a, b, c`.
    std::vector<double> reals(const std::string& key) const;
    /// `(a, b), (c, d, e)`.
    std::vector<std::vector<double>> tuples(const std::string& key) const;

    /// Throws ConfigError at the first key not in `known`.
    void require_known(const std::vector<std::string>& known) const;

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const Entry& at(const std::string& key) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
};

}  // namespace carnot
