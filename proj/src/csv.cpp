#include "pullsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

#include "pullsim/error.hpp"

namespace pullsim::csv {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw ParameterError("cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw ParameterError("not a number: '" + std::string(text) + "'");
    return value;
}

std::string format_optional(const std::optional<double>& value) { return value ? format_double(*value) : ""; }

std::optional<double> parse_optional(std::string_view text) {
    if (text.empty()) return std::nullopt;
    return parse_double(text);
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ParameterError("no column named '" + std::string(name) + "'");
}

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            return cells;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

void write(std::ostream& out, const Table& table) {
    write_row(out, table.header);
    for (const auto& row : table.rows) write_row(out, row);
}

std::string to_string(const Table& table) {
    std::ostringstream ss;
    write(ss, table);
    return ss.str();
}

Table parse(std::string_view text) {
    Table table;
    bool first = true;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = nl + 1;
        if (line.empty()) continue;
        auto cells = split(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size()) throw ParameterError("CSV row width does not match header");
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

}  // namespace pullsim::csv
