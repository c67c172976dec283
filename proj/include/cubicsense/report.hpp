#pragma once

// Row and table types shared by the protocol scans, the CLI commands and the
// acceptance runner. CSV output is the primary format (deterministic,
// byte-stable); JSON mirrors it as an array of objects.

#include <optional>
#include <string>
#include <vector>

namespace cubicsense {

// One sensitivity record; optional fields stay empty in CSV and are omitted
// from JSON objects.
struct SensitivityReport {
    std::string protocol;
    double n = 0;
    std::optional<double> r, s;
    double f_q = 0;
    double f_q_over_n = 0;
    std::optional<double> xi2_inv_1, xi2_inv_2, xi2_inv_3, xi2_inv_4;
    std::optional<double> gamma_t, sigma;
    std::optional<double> lambda, kerr_time, triplicity;
    long dim_used = 0;           // 0 marks a closed-form row
    double truncation_tail = 0;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;
    std::vector<std::string> row_tags;  // optional first column of strings

    bool has_tags() const { return !row_tags.empty(); }
};

// Shortest round-trippable decimal representation; keeps CSV output
// byte-identical across runs.
std::string format_double(double v);

std::string table_to_csv(const Table& t, const std::string& tag_column);
std::string table_to_json(const Table& t, const std::string& tag_column);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace cubicsense
