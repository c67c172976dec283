#include "cubicsense/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cubicsense/errors.hpp"

namespace cubicsense {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string table_to_csv(const Table& t, const std::string& tag_column) {
    std::string out;
    if (t.has_tags()) {
        out += tag_column;
        if (!t.columns.empty()) out += ',';
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.has_tags()) {
            out += t.row_tags[i];
            if (!t.columns.empty()) out += ',';
        }
        const auto& row = t.rows[i];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            if (row[c]) out += format_double(*row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string table_to_json(const Table& t, const std::string& tag_column) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        nlohmann::json obj = nlohmann::json::object();
        if (t.has_tags()) obj[tag_column] = t.row_tags[i];
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            if (t.rows[i][c]) obj[t.columns[c]] = *t.rows[i][c];
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << content;
    if (!f) throw ConfigError("failed writing " + path);
}

}  // namespace cubicsense
