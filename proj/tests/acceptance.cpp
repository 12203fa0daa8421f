// Acceptance gate: runs every criterion at its pinned tolerance and prints
// one pass/fail line each. Exit status is nonzero if any criterion fails.

#include <cstring>
#include <iostream>

#include "fpm/selftest.hpp"

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    const auto results = fpm::run_acceptance(quick);
    bool all = true;
    for (const fpm::CriterionResult& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.index << ". " << r.name << ": "
                  << r.stat << std::endl;
        all = all && r.pass;
    }
    std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
              << std::endl;
    return all ? 0 : 1;
}
