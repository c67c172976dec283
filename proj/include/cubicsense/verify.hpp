#pragma once

// Acceptance suite: every release criterion evaluated at its pinned tolerance,
// shared by the `verify` CLI command and the acceptance test binary.

#include <string>
#include <vector>

#include "cubicsense/report.hpp"

namespace cubicsense {

struct CriterionResult {
    std::string id;
    std::string description;
    double measured = 0;
    double target = 0;
    double tolerance = 0;
    bool pass = false;
    std::string detail;
};

struct VerifyConfig {
    long max_dim = 4096;   // cap for truncation-converged oracle states
    long loss_dim = 60;    // Lindblad working dimension
    int loss_steps = 1600;
    long noise_dim = 200;  // detection-noise working dimension
    double tail_tol = 1e-8;
    unsigned threads = 0;
    unsigned seed = 20240809;  // random draws for the sampled criteria
};

std::vector<CriterionResult> run_acceptance(const VerifyConfig& cfg = {});

Table acceptance_table(const std::vector<CriterionResult>& results);

// One "PASS/FAIL id: ..." line per criterion.
std::string format_criterion_line(const CriterionResult& r);

}  // namespace cubicsense
