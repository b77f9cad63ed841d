#include "qdarwin/table.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "qdarwin/errors.hpp"

namespace qdarwin::table {
namespace {

// Cells and metadata values share the CSV line with ',' and '\n' as
// structure; doubles never contain either, metadata is restricted instead.
void check_metadata_entry(const std::string& k, const std::string& v) {
    if (k.empty() || k.find_first_of("=,\n") != std::string::npos ||
        v.find('\n') != std::string::npos)
        throw schema_error("metadata key/value not representable in CSV: " + k);
}

double parse_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw schema_error("not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

void OutputTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw schema_error("row width does not match column count");
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const OutputTable& t) {
    std::ostringstream out;
    for (const auto& [k, v] : t.metadata) {
        check_metadata_entry(k, v);
        out << "# " << k << '=' << v << '\n';
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            if (row[c]) out << format_double(*row[c]);
        }
        out << '\n';
    }
    return out.str();
}

OutputTable from_csv(const std::string& text) {
    OutputTable t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            if (have_header)
                throw schema_error("metadata line after the header");
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw schema_error("malformed metadata line: " + line);
            t.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (!have_header) {
            t.columns = split(line, ',');
            have_header = true;
            continue;
        }
        std::vector<Cell> row;
        for (const std::string& field : split(line, ','))
            row.push_back(field.empty() ? Cell{} : Cell{parse_double(field)});
        t.add_row(std::move(row));
    }
    if (!have_header) throw schema_error("CSV table without a header row");
    return t;
}

std::string to_json(const OutputTable& t) {
    nlohmann::json j;
    j["columns"] = t.columns;
    j["metadata"] = t.metadata;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (const Cell& c : row) {
            if (c)
                jr.push_back(*c);
            else
                jr.push_back(nullptr);
        }
        rows.push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

OutputTable from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("columns") || !j.contains("rows") ||
        !j.contains("metadata") || j.size() != 3)
        throw schema_error("table JSON must have exactly columns/metadata/rows");
    OutputTable t;
    if (!j["columns"].is_array()) throw schema_error("columns must be an array");
    for (const auto& c : j["columns"]) {
        if (!c.is_string()) throw schema_error("column names must be strings");
        t.columns.push_back(c.get<std::string>());
    }
    if (!j["metadata"].is_object()) throw schema_error("metadata must be an object");
    for (const auto& [k, v] : j["metadata"].items()) {
        if (!v.is_string()) throw schema_error("metadata values must be strings");
        t.metadata[k] = v.get<std::string>();
    }
    if (!j["rows"].is_array()) throw schema_error("rows must be an array");
    for (const auto& jr : j["rows"]) {
        if (!jr.is_array()) throw schema_error("each row must be an array");
        std::vector<Cell> row;
        for (const auto& c : jr) {
            if (c.is_null())
                row.push_back(Cell{});
            else if (c.is_number())
                row.push_back(Cell{c.get<double>()});
            else
                throw schema_error("cells must be numbers or null");
        }
        t.add_row(std::move(row));
    }
    return t;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace qdarwin::table
