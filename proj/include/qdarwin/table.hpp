#pragma once

// Deterministic tabular output: named columns, optional-valued cells, string
// metadata. Serializes to CSV and JSON with identical values; floats use
// %.17g so every double round-trips bit-exactly.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdarwin::table {

using Cell = std::optional<double>;  // nullopt = empty CSV field / JSON null

struct OutputTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;          // each row matches columns
    std::map<std::string, std::string> metadata;  // sorted, hence deterministic

    void add_row(std::vector<Cell> row);  // throws schema_error on width mismatch
};

// %.17g, the shortest fixed precision that is lossless for binary64.
std::string format_double(double v);

// CSV layout: one "# key=value" line per metadata entry (sorted), then the
// header row, then data rows. LF line endings only.
std::string to_csv(const OutputTable& t);
OutputTable from_csv(const std::string& text);

// JSON layout: {"columns": [...], "metadata": {...}, "rows": [[...]]} with
// null for empty cells. Matches scenarios/table.schema.json.
std::string to_json(const OutputTable& t);
OutputTable from_json(const std::string& text);

// FNV-1a 64-bit over bytes; used for scenario fingerprints in metadata.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qdarwin::table
