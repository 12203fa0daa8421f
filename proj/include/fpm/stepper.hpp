#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpm/field.hpp"

namespace fpm {

// One implicit step of the regularized semi-discrete scheme
//
//   (u - u*)/tau = div(u grad p) + rho1 div(|grad w|^(1/beta - 1) grad w)
//                  - eps |w|^(1/beta - 1) w gamma,     w = u^(beta-1),
//   (p - p*)/tau = -(-Delta)^s p + rho2 Delta p + u^beta,
//
// solved as a damped Picard loop around the frozen-coefficient pair: an exact
// mode-wise pressure solve and a strictly convex density solve in w.
struct SchemeParams {
    double beta = 2.0;
    double s = 0.75;        // needs s * beta > 1
    double tau = 1e-3;
    double epsilon = 1e-3;
    double rho1 = 1e-3;
    double rho2 = 1e-3;
    double theta = 0.5;     // Picard damping in (0, 1]
    double delta_grad = 1e-8;  // gradient/zero-order mollifier, relative to the w scale
    double picard_tol = 1e-9;
    int picard_max = 100;
    double inner_tol = 1e-10;  // discrete L2 residual target of the density solve
    int inner_max = 50;
    double tol_neg = 1e-9;     // nonnegativity tolerance, relative to the field scale
    double slack_tol = 1e-8;   // energy-inequality slack tolerance, relative to H

    void validate() const;  // throws std::invalid_argument
};

struct StepState {
    ScalarField u;
    ScalarField p;
    double time = 0.0;
};

struct StepDiagnostics {
    int step = 0;
    double time = 0.0;
    double tau_used = 0.0;
    int picard_iters = 0;
    int inner_iters = 0;
    double residual_u = 0.0;  // residual of the accepted (w, p, u) triple
    double residual_p = 0.0;
    double mass_u_before = 0.0, mass_u_after = 0.0;
    double mass_p_before = 0.0, mass_p_after = 0.0;
    double energy_before = 0.0, energy_after = 0.0;  // Lyapunov H
    double energy_slack = 0.0;                       // see coupled_step
    double min_u = 0.0, min_p = 0.0;
    double max_u = 0.0, max_p = 0.0;
    double dissipation_s = 0.0;  // int |(-Delta)^(s/2) grad p|^2
    double diss_w = 0.0;         // int (|grad w|^2 + d^2)^((1-beta)/2beta) |grad w|^2
    double diss_eps = 0.0;       // int (w^2 + d^2)^((1-beta)/2beta) w^2 gamma
    double diss_lap = 0.0;       // int (Delta p)^2
    double eps_leak_rate = 0.0;  // int B(w) gamma, the mass drain rate of the eps term
    double source_mass = 0.0;    // int u^beta
    double boundary_indicator = 0.0;
};

// Exact diagonal solve of (p - p*)/tau + (-Delta)^s p - rho2 Delta p = source:
// p_hat = (p*_hat + tau source_hat) / (1 + tau (|k|^2s + rho2 |k|^2)).
ScalarField pressure_step(const ScalarField& p_prev, const ScalarField& source,
                          const SchemeParams& par);

// Strong-form pressure residual of a candidate p (diagnostic).
double pressure_residual(const ScalarField& p, const ScalarField& p_prev,
                         const ScalarField& source, const SchemeParams& par);

// Mollifier actually used by a density solve with this previous density:
// delta_grad * max |u_prev^(beta-1)|.
double density_delta(const ScalarField& u_prev, const SchemeParams& par);

// Residual of the density equation in the unknown w (transport is the u-like
// Picard iterate; the flux coefficient multiplying grad p is transport
// itself):
//   F(w) = (1/tau)(spow(w, 1/(beta-1)) - u_prev) - div(transport grad p)
//          - rho1 div(A(grad w) grad w) + eps B(w) gamma,
// with A(g) = (|g|^2 + d^2)^((1-beta)/(2beta)), B(w) = (w^2+d^2)^((1-beta)/(2beta)) w.
// The transport drift is spectral; the rho1 flux uses the adjoint-exact
// forward/backward difference pair, which keeps the solve variational and
// positivity-friendly at sharp profile shoulders.
ScalarField density_residual(const ScalarField& w, const ScalarField& u_prev,
                             const ScalarField& p, const ScalarField& transport,
                             const SchemeParams& par);

// The strictly convex objective whose gradient (w.r.t. the lattice values,
// with the h^2 quadrature weight) is density_residual. The density solve and
// the brute-force oracle both minimize exactly this.
double density_objective(const ScalarField& w, const ScalarField& u_prev,
                         const ScalarField& p, const ScalarField& transport,
                         const SchemeParams& par);

struct DensityResult {
    ScalarField w;
    int newton_iters = 0;
    double residual = 0.0;
    bool converged = false;
};

// Damped Newton with Armijo line search on the objective; falls back to
// preconditioned gradient descent when a Newton direction fails. Returns w
// with || F(w) ||_{L2,h} <= inner_tol on success.
DensityResult density_step(const ScalarField& u_prev, const ScalarField& p,
                           const ScalarField& transport, const SchemeParams& par,
                           const ScalarField* warm_start = nullptr);

struct StepResult {
    bool accepted = false;
    std::string reason;  // why the step was rejected
    StepState state;
    StepDiagnostics diag;
};

// One accepted step = converged Picard loop + a final pressure solve with the
// accepted u^beta source (which makes the pressure mass identity exact) +
// nonnegativity and energy-slack gates. Never clamps: a violated tolerance
// rejects the step.
StepResult coupled_step(const StepState& state, const SchemeParams& par);

// Snapshot record of a run at the stored cadence.
struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<ScalarField> u;
    std::vector<ScalarField> p;
};

struct EvolveOptions {
    double horizon = 0.0;
    int snapshot_every = 10;
    bool retry_halve_tau = false;  // on Picard failure only; slack failures are fatal
    double tau_floor_factor = 1.0 / 64.0;
    std::string out_dir;           // when set: CSV + snapshots are written here
    bool store_trajectory = true;
};

struct EvolveResult {
    bool completed = false;
    std::string abort_reason;
    StepState final_state;
    std::vector<StepDiagnostics> series;  // row 0 describes the initial state
    Trajectory trajectory;
    SchemeParams params;
    double h0 = 0.0;  // Lyapunov energy of the initial state

    // Terminal budget summary: sum over steps of tau * (rho1 Dw + eps De +
    // (beta-1)/beta (Ds + rho2 D2)), the drop of the scaled energy E, and
    // their gap (= the time-integrated slack, >= -slack_tol * H0 when the
    // budget holds).
    double cumulative_dissipation = 0.0;
    double energy_drop = 0.0;
    double budget_gap = 0.0;
};

EvolveResult evolve(const StepState& initial, const SchemeParams& par, const EvolveOptions& opt);

}  // namespace fpm
