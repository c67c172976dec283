#pragma once

// Command layer: every figure's underlying data as CSV/JSON plus single-point
// queries and the acceptance run. The CLI binary only parses flags into a
// RunConfig and calls run().

#include <optional>
#include <string>
#include <vector>

#include "cubicsense/report.hpp"

namespace cubicsense {

enum class OutputFormat { csv, json };

struct RunConfig {
    std::string command;
    std::string output_path;  // empty: <outdir>/<command>.<format>
    OutputFormat format = OutputFormat::csv;
    long seed = 0;      // reserved for sampling consumers; recorded, not used by commands
    long max_dim = 0;   // 0 = command default (256; the acceptance run uses 4096)
    int steps = 1000;   // Lindblad integrator steps per stage
    unsigned threads = 0;
    double tail_tol = 1e-8;

    // command-specific overrides
    std::optional<double> n;      // fig2: emit a single-population row set
    std::optional<double> r, s;   // point
    std::optional<double> sigma;  // point: add detection-noise columns
    std::optional<double> gamma;  // point: loss during preparation
    double fig1b_r_max = 0.5, fig1b_s_max = 0.6;
    int fig1b_resolution = 101;
    double fig2_n_min = 0.01, fig2_n_max = 1000;
    int fig2_count = 121;
    double fig3b_gamma_max = 1.4;
    int fig3b_count = 15;
    double fig3c_sigma_max = 2.0;
    int fig3c_count = 81;
};

// Exit status: 0 success, 1 computation error, 2 configuration error.
int run(const RunConfig& config);

// Exposed for tests: the table a command would emit.
Table build_command_table(const RunConfig& config);

const std::vector<std::string>& known_commands();

// Compiled-in column schema for a command (versioned copies live in schemas/).
std::vector<std::string> command_schema(const std::string& command);

std::string default_output_dir();

}  // namespace cubicsense
