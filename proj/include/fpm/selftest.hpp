#pragma once

#include <string>
#include <vector>

namespace fpm {

// The acceptance suite: one entry per criterion, pinned tolerances, desk
// scale. `quick` shrinks grids and horizons for smoke runs; the full suite is
// what the acceptance gate runs.
struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string stat;
};

std::vector<CriterionResult> run_acceptance(bool quick = false);

}  // namespace fpm
