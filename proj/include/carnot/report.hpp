#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace carnot {

/// Shortest decimal that round-trips to the same double.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Comma-separated rows with a header; cells are pre-formatted strings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvWriter& cell(double v) { return cell(format_real(v)); }
    CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::uint64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::string_view s) {
        row_.emplace_back(s);
        return *this;
    }
    void end_row() {
        rows_.push_back(std::move(row_));
        row_.clear();
    }

    std::size_t rows() const { return rows_.size(); }

    void write(std::ostream& out) const {
        write_row(out, header_);
        for (const auto& r : rows_) write_row(out, r);
    }

private:
    static void write_row(std::ostream& out, const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::string> row_;
};

}  // namespace carnot
