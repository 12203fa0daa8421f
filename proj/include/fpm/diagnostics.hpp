#pragma once

#include <string>
#include <vector>

#include "fpm/stepper.hpp"

namespace fpm {

// A recorded run: scheme parameters plus the per-step diagnostic rows
// (row 0 is the initial state). Rebuildable bit-identically from the CSV.
struct BudgetSeries {
    SchemeParams params;
    double area = 0.0;  // box area, used to convert L2 residual norms to mass bounds
    std::vector<StepDiagnostics> rows;

    double h0() const { return rows.empty() ? 0.0 : rows.front().energy_after; }
};

struct CheckReport {
    std::string name;
    bool pass = false;
    double worst = 0.0;
    std::string detail;
};

// Time-integrated energy budget: recomputes every per-step slack from the
// recorded columns, requires it to match the recorded slack, and requires
// both the per-step slacks and their running time integral to stay above
// -slack_tol * H(0).
CheckReport check_energy_budget(const BudgetSeries& series);

// Per-step identity  int p_k - int p_{k-1} - tau int u_k^beta = 0  to
// 1e-10 * scale, plus the linear-in-time global bound with
// C = max_k int u_k^beta.
CheckReport check_pressure_mass(const BudgetSeries& series);

// min u, min p >= -tol_neg * (field scale) on every accepted step.
CheckReport check_nonnegativity(const BudgetSeries& series);

// Density mass budget: with epsilon = 0 the mass of u is conserved to
// solver residual; with epsilon > 0 the recorded leakage matches the
// recorded eps-dissipation term.
CheckReport check_density_mass(const BudgetSeries& series);

// Norm monitors of the function classes the solution is expected to live in,
// evaluated on a snapshot trajectory. `lr` uses the interpolation exponent
// r(beta).
struct TheoremNorms {
    double sup_l1_u = 0.0;
    double sup_lbeta_u = 0.0;
    double lbeta1_spacetime_u = 0.0;   // L^{beta+1} in space-time
    double lr_spacetime_u = 0.0;       // L^r in space-time
    double sup_h1_p = 0.0;
    double l2_hs1_p = 0.0;             // L^2(0,T; H^{s+1})
    double sup_weighted_u = 0.0;       // sup_t of the gamma-weighted L^{(1+beta)/beta} norm
    bool all_finite = false;
};
TheoremNorms check_theorem_norms(const Trajectory& traj, double beta, double s);

// Per-interval integral of u D_t p - u |grad p|^2 (the Div-Curl product).
std::vector<double> divcurl_monitor(const Trajectory& traj);

// Eight fixed smooth plateau bumps, scaled to the box: entry 0 is identically
// one on [-L/4, L/4]^2; the rest are translated/narrowed copies (centers and
// halfwidths in fractions of L are listed in the implementation).
std::vector<ScalarField> test_function_battery(const Grid& g);

// Duality surrogate for the time-derivative bounds: the pairing of the
// discrete time differences of u and p against the battery, normalized by
// the W^{1,q} / L^q norms the estimates pair against.
struct DualNormReport {
    double max_ratio_u = 0.0;
    double max_ratio_p = 0.0;
    std::vector<double> ratio_u_per_interval;
    std::vector<double> ratio_p_per_interval;
};
DualNormReport dual_norm_surrogate(const Trajectory& traj, double beta, double s);

}  // namespace fpm
