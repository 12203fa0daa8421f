#pragma once

#include <span>
#include <string>
#include <vector>

#include "fpm/diagnostics.hpp"
#include "fpm/stepper.hpp"

namespace fpm {

// Regularization-limit sweeps. The limits are taken in the fixed order
// epsilon, tau, rho2, rho1; a sweep of a later parameter requires the
// earlier vanishing parameters to sit at zero already (tau can only shrink,
// so it imposes no zero condition on later sweeps). delta_grad sweeps are a
// sanity check on the artifact mollifier and are unconstrained.
enum class SweepParameter { epsilon, tau, rho2, rho1, delta_grad };

SweepParameter sweep_parameter_from_string(const std::string& name);
std::string to_string(SweepParameter p);

struct LadderSpec {
    StepState initial;
    SchemeParams base;
    SweepParameter parameter = SweepParameter::rho1;
    double start = 1e-3;   // largest swept value; rung i uses start * ratio^i
    double ratio = 0.5;
    int count = 4;
    double horizon = 0.04;
    int snapshot_every = 5;       // cadence in steps of the coarsest rung
    double interior_margin = 0.1; // spatial margin of the comparison box

    void validate() const;  // throws std::invalid_argument
};

struct LadderReport {
    SweepParameter parameter = SweepParameter::rho1;
    std::vector<double> values;            // per rung
    std::vector<double> cauchy_u, cauchy_p;  // consecutive-rung interior L2 differences
    std::vector<double> order_u, order_p;    // log-ratio order estimates
    std::vector<double> sup_h;               // per rung: sup_t of the Lyapunov energy
    std::vector<double> lbeta1_u;            // per rung: space-time L^{beta+1} of u
    std::vector<double> dual_ratio_u;        // per rung: dual-norm surrogate maxima
    std::vector<double> dual_ratio_p;
    std::vector<std::vector<double>> divcurl;  // per rung series
    bool pass = false;
    std::string detail;
};

// Runs every rung from the shared initial data, aligns the trajectories on
// the coarsest common snapshot times, and passes when the consecutive
// interior-L2 Cauchy differences of both u and p decrease monotonically
// within a 10% tolerance band (needs at least 4 rungs / 3 differences).
// Rungs run concurrently when jobs > 1; the report is assembled in rung
// order and is bit-identical across reruns.
LadderReport run_ladder(const LadderSpec& spec, int jobs = 1);

// ladder_report.csv plus a summary text block.
void write_ladder_outputs(const std::string& dir, const LadderReport& report);

// Elementary truncation device: for each k, the space-time integral of
// (a - b)(T_k(a)^beta - T_k(b)^beta) phi over the battery functions phi.
// Nonnegative and nondecreasing in k for nonnegative inputs.
struct TruncationRow {
    double k = 0.0;
    std::vector<double> values;  // one entry per battery function
};
std::vector<TruncationRow> truncation_probe(const Trajectory& a, const Trajectory& b,
                                            std::span<const double> k_list, double beta);
// Single-pair version (time weight 1).
std::vector<TruncationRow> truncation_probe(const ScalarField& a, const ScalarField& b,
                                            std::span<const double> k_list, double beta);

// G_delta(x) = min(x / delta, 1): integral of G_delta(p) p, nondecreasing as
// delta decreases, converging to the integral of the positive part.
struct GdeltaRow {
    double delta = 0.0;
    double value = 0.0;
};
std::vector<GdeltaRow> gdelta_probe(const ScalarField& p, std::span<const double> deltas);
double positive_part_mass(const ScalarField& p);

}  // namespace fpm
