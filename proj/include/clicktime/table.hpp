#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Result tables with a units row and deterministic serialization. Files are
// written to a temporary name and renamed into place, so a failed run never
// leaves a partial file behind.

namespace clicktime {

struct Cell {
    enum class Kind { number, text };
    Kind kind = Kind::number;
    double num = 0;
    std::string text;

    static Cell of(double v) { return Cell{Kind::number, v, {}}; }
    static Cell of(std::string s) { return Cell{Kind::text, 0, std::move(s)}; }
};

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::string> units;
    std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v);  // %.17g, locale-independent

void write_csv(const ResultTable& t, const std::filesystem::path& path);

// JSON object {columns, units, rows}; extra_json, when nonempty, must be a
// serialized JSON object and is merged in under "summary".
void write_json(const ResultTable& t, const std::filesystem::path& path,
                const std::string& summary_json = {});

void write_text_atomic(const std::filesystem::path& path, const std::string& body);

}  // namespace clicktime
