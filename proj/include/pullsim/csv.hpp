#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pullsim::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// An absent numeric value is written as an empty field.
std::string format_optional(const std::optional<double>& value);
std::optional<double> parse_optional(std::string_view text);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws ParameterError if absent.
    std::size_t column(std::string_view name) const;
};

/// Fields never contain commas or quotes, so no quoting is applied.
void write(std::ostream& out, const Table& table);
std::string to_string(const Table& table);
Table parse(std::string_view text);

}  // namespace pullsim::csv
