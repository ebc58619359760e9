#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace custseg::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `column` in the header; throws SchemaError when absent.
    std::size_t column(std::string_view name) const;
};

/// Comma-delimited, header required, double-quoted fields allowed. Lines
/// starting with '#' before the header are skipped. CRLF tolerated.
Table parse(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format(double value);
/// Fixed-point with `decimals` places.
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view cell, std::size_t row, std::string_view column);
long long parse_int(std::string_view cell, std::size_t row, std::string_view column);

std::string join(const std::vector<std::string>& cells);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace custseg::csv
