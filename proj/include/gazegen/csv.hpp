#pragma once

// Minimal CSV/TSV plumbing shared by the file-facing modules. Handles
// RFC-style quoting (word surfaces contain commas).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gazegen::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index for a header name; throws InputError if missing.
    std::size_t col(const std::string& name) const;
};

Table read_file(const std::string& path, char delim = ',');
Table read_stream(std::istream& in, char delim = ',');

std::string escape_field(const std::string& field, char delim = ',');
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim = ',');

// Numeric field helpers; empty fields map to nullopt.
std::optional<double> parse_optional_double(const std::string& field);
double parse_double(const std::string& field, const std::string& what);
long parse_long(const std::string& field, const std::string& what);

std::string format_double(double v);

} // namespace gazegen::csv
