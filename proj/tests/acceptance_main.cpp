// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <cstdio>
#include <iostream>

#include "cubicsense/verify.hpp"

int main() {
    const auto results = cubicsense::run_acceptance();
    bool ok = true;
    for (const auto& r : results) {
        std::cout << cubicsense::format_criterion_line(r) << std::endl;
        ok = ok && r.pass;
    }
    std::cout << (ok ? "ACCEPTANCE: all criteria passed"
                     : "ACCEPTANCE: at least one criterion failed")
              << std::endl;
    return ok ? 0 : 1;
}
