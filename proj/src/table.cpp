#include "clicktime/table.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace clicktime {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& body) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << body;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string cell_csv(const Cell& c) {
    return c.kind == Cell::Kind::number ? format_double(c.num) : c.text;
}

}  // namespace

void write_csv(const ResultTable& t, const std::filesystem::path& path) {
    std::string body;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        body += (i ? "," : "") + t.columns[i];
    body += '\n';
    for (std::size_t i = 0; i < t.units.size(); ++i)
        body += (i ? "," : "") + t.units[i];
    body += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            body += (i ? "," : "") + cell_csv(row[i]);
        body += '\n';
    }
    write_text_atomic(path, body);
}

void write_json(const ResultTable& t, const std::filesystem::path& path,
                const std::string& summary_json) {
    nlohmann::json j;
    j["columns"] = t.columns;
    j["units"] = t.units;
    auto rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        auto jr = nlohmann::json::array();
        for (const auto& c : row) {
            if (c.kind == Cell::Kind::number)
                jr.push_back(c.num);
            else
                jr.push_back(c.text);
        }
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    if (!summary_json.empty()) j["summary"] = nlohmann::json::parse(summary_json);
    write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace clicktime
