#include "gazegen/csv.hpp"

#include "gazegen/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gazegen::csv {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace

std::size_t Table::col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw InputError("missing column '" + name + "' in CSV header");
}

Table read_stream(std::istream& in, char delim) {
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_line(line, delim);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

Table read_file(const std::string& path, char delim) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open file: " + path);
    return read_stream(in, delim);
}

std::string escape_field(const std::string& field, char delim) {
    bool needs_quotes = field.find(delim) != std::string::npos ||
                        field.find('"') != std::string::npos ||
                        field.find('\n') != std::string::npos;
    if (!needs_quotes)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out << delim;
        out << escape_field(fields[i], delim);
    }
    out << '\n';
}

std::optional<double> parse_optional_double(const std::string& field) {
    if (field.empty())
        return std::nullopt;
    return parse_double(field, "numeric field");
}

double parse_double(const std::string& field, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size())
            throw InputError("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("cannot parse " + what + " from '" + field + "'");
    }
}

long parse_long(const std::string& field, const std::string& what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(field, &pos);
        if (pos != field.size())
            throw InputError("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InputError("cannot parse " + what + " from '" + field + "'");
    }
}

std::string format_double(double v) {
    if (std::isnan(v))
        return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace gazegen::csv
