#pragma once

#include <functional>
#include <vector>

namespace fpm {

// Derivative-free minimizer for smooth strictly convex objectives, used as
// the independent cross-check of the variational solves: it only ever calls
// the objective, so it shares no code path with the Newton solver it checks.
// Finite-difference gradients drive Barzilai-Borwein steps guarded by an
// Armijo backtracking rule.
struct OracleOptions {
    int max_iters = 4000;
    double grad_tol = 1e-7;   // stop when the FD gradient norm drops below this
    // Relative central-difference step. The default balances truncation
    // against value-rounding noise for objectives of order 1e2.
    double fd_step = 1e-4;
};

struct OracleResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
};

OracleResult minimize_by_values(const std::function<double(const std::vector<double>&)>& objective,
                                std::vector<double> x0, const OracleOptions& opt = {});

}  // namespace fpm
