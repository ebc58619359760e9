#include "custseg/csv.hpp"

#include "custseg/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace custseg::csv {

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaError(std::string(name));
}

Table parse(std::string_view text) {
    Table table;
    bool have_header = false;
    std::size_t pos = 0;
    // Skip UTF-8 BOM.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        if (!have_header) {
            if (line.front() == '#') continue;
            for (auto& cell : split_line(line)) table.header.emplace_back(trim(cell));
            have_header = true;
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw ParseError(table.rows.size(), "expected " + std::to_string(table.header.size()) +
                                                    " cells, found " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw SchemaError("<header row>");
    return table;
}

std::string format(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view cell, std::size_t row, std::string_view column) {
    const std::string_view s = trim(cell);
    double value = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(value)) {
        throw ParseError(row, "cannot parse " + std::string(column) + " value '" + std::string(cell) + "'");
    }
    return value;
}

long long parse_int(std::string_view cell, std::size_t row, std::string_view column) {
    const std::string_view s = trim(cell);
    long long value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        // Accept integral values written as reals, e.g. "29.0".
        const double d = parse_double(cell, row, column);
        if (d != std::floor(d) || std::fabs(d) > 9.0e15) {
            throw ParseError(row, "expected integer " + std::string(column) + ", got '" + std::string(cell) + "'");
        }
        return static_cast<long long>(d);
    }
    return value;
}

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        const bool needs_quotes = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (!needs_quotes) {
            out += cells[i];
            continue;
        }
        out.push_back('"');
        for (char ch : cells[i]) {
            if (ch == '"') out.push_back('"');
            out.push_back(ch);
        }
        out.push_back('"');
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace custseg::csv
