#include "fpm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpm/energy.hpp"
#include "fpm/io.hpp"
#include "fpm/spectral.hpp"

namespace fpm {

void SchemeParams::validate() const {
    if (!(beta > 1.0)) throw std::invalid_argument("SchemeParams: beta > 1 required");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("SchemeParams: s in (0,1) required");
    if (!(s * beta > 1.0)) throw std::invalid_argument("SchemeParams: s * beta > 1 required");
    if (!(tau > 0.0)) throw std::invalid_argument("SchemeParams: tau > 0 required");
    if (epsilon < 0.0 || rho1 < 0.0 || rho2 < 0.0)
        throw std::invalid_argument("SchemeParams: epsilon, rho1, rho2 must be >= 0");
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("SchemeParams: theta in (0,1] required");
    if (!(delta_grad > 0.0)) throw std::invalid_argument("SchemeParams: delta_grad > 0 required");
    if (!(picard_tol > 0.0) || !(inner_tol > 0.0) || !(tol_neg > 0.0) || !(slack_tol > 0.0))
        throw std::invalid_argument("SchemeParams: tolerances must be positive");
    if (picard_max < 1 || inner_max < 1)
        throw std::invalid_argument("SchemeParams: iteration caps must be >= 1");
}

ScalarField pressure_step(const ScalarField& p_prev, const ScalarField& source,
                          const SchemeParams& par) {
    require_finite(p_prev, "pressure_step p_prev");
    require_finite(source, "pressure_step source");
    const Grid& g = p_prev.grid();
    const int n = g.n;
    const int nh = n / 2 + 1;
    Spectrum ph = forward_fft(p_prev);
    Spectrum sh = forward_fft(source);
    for (int sx = 0; sx < n; ++sx) {
        const double kx = g.wave_deriv[sx];
        for (int sy = 0; sy < nh; ++sy) {
            const double ky = g.wave_deriv[sy];
            const double k2 = kx * kx + ky * ky;
            const double sym = (k2 == 0.0) ? 0.0 : std::pow(k2, par.s) + par.rho2 * k2;
            const size_t i = static_cast<size_t>(sx) * nh + sy;
            ph[i] = (ph[i] + par.tau * sh[i]) / (1.0 + par.tau * sym);
        }
    }
    return inverse_fft(ph, g);
}

double pressure_residual(const ScalarField& p, const ScalarField& p_prev,
                         const ScalarField& source, const SchemeParams& par) {
    ScalarField r = fractional_laplacian(p, par.s);
    ScalarField lap = laplacian(p);
    const double inv_tau = 1.0 / par.tau;
    for (size_t i = 0; i < r.values().size(); ++i)
        r[i] += inv_tau * (p[i] - p_prev[i]) - par.rho2 * lap[i] - source[i];
    return l2h_norm(r);
}

double density_delta(const ScalarField& u_prev, const SchemeParams& par) {
    return par.delta_grad * std::max(linf_norm(spow(u_prev, par.beta - 1.0)), 1e-30);
}

namespace {

// The rho1 flux term is discretized with the forward/backward difference
// pair: gradients live on forward faces, the divergence is their exact
// negative adjoint (summation by parts is exact on the periodic lattice).
// This keeps the solve variational to round-off and, unlike a spectral
// evaluation, does not ring at sharp profile shoulders, so the solution
// stays nonnegative down to the solver tolerance. The transport drift and
// the pressure coupling remain spectral.
void fd_forward_gradient(const ScalarField& w, ScalarField& gx, ScalarField& gy) {
    const Grid& g = w.grid();
    const int n = g.n;
    const double inv_h = 1.0 / g.spacing;
    for (int ix = 0; ix < n; ++ix) {
        const int ixp = (ix + 1) % n;
        for (int iy = 0; iy < n; ++iy) {
            const int iyp = (iy + 1) % n;
            gx(ix, iy) = (w(ixp, iy) - w(ix, iy)) * inv_h;
            gy(ix, iy) = (w(ix, iyp) - w(ix, iy)) * inv_h;
        }
    }
}

// Exact negative adjoint of fd_forward_gradient.
void fd_backward_divergence(const ScalarField& fx, const ScalarField& fy, ScalarField& out) {
    const Grid& g = fx.grid();
    const int n = g.n;
    const double inv_h = 1.0 / g.spacing;
    for (int ix = 0; ix < n; ++ix) {
        const int ixm = (ix + n - 1) % n;
        for (int iy = 0; iy < n; ++iy) {
            const int iym = (iy + n - 1) % n;
            out(ix, iy) = (fx(ix, iy) - fx(ixm, iy) + fy(ix, iy) - fy(ix, iym)) * inv_h;
        }
    }
}

struct DensityTerms {
    double inv_tau;
    double q_root;   // 1/(beta-1): u = spow(w, q_root)
    double nu;       // (1-beta)/(2*beta), exponent of the mollified coefficients
    double delta2;
    ScalarField drift;   // div(transport grad p), fixed data of the solve
    ScalarField gamma;   // confinement weight
};

DensityTerms make_terms(const ScalarField& u_prev, const ScalarField& p,
                        const ScalarField& transport, const SchemeParams& par) {
    DensityTerms t{1.0 / par.tau,
                   1.0 / (par.beta - 1.0),
                   (1.0 - par.beta) / (2.0 * par.beta),
                   0.0,
                   ScalarField(),
                   ScalarField()};
    const double d = density_delta(u_prev, par);
    t.delta2 = d * d;
    auto [px, py] = gradient(p);
    // De-aliased quadratic flux: without the filter the product's folded
    // modes build a Nyquist checkerboard in the far tail over long runs.
    t.drift = divergence(dealias(hadamard(transport, px)), dealias(hadamard(transport, py)));
    t.gamma = weight_field(u_prev.grid());
    return t;
}

ScalarField residual_impl(const ScalarField& w, const ScalarField& u_prev,
                          const SchemeParams& par, const DensityTerms& t) {
    const Grid& g = w.grid();
    ScalarField wx(g), wy(g), qlap(g);
    fd_forward_gradient(w, wx, wy);
    ScalarField fx = wx, fy = wy;
    for (size_t i = 0; i < fx.values().size(); ++i) {
        const double g2 = wx[i] * wx[i] + wy[i] * wy[i];
        const double a = std::pow(g2 + t.delta2, t.nu);
        fx[i] *= a;
        fy[i] *= a;
    }
    fd_backward_divergence(fx, fy, qlap);
    ScalarField res = w;
    for (size_t i = 0; i < res.values().size(); ++i) {
        const double b = std::pow(w[i] * w[i] + t.delta2, t.nu) * w[i];
        res[i] = t.inv_tau * (spow(w[i], t.q_root) - u_prev[i]) - t.drift[i] -
                 par.rho1 * qlap[i] + par.epsilon * b * t.gamma[i];
    }
    return res;
}

double objective_impl(const ScalarField& w, const ScalarField& u_prev, const SchemeParams& par,
                      const DensityTerms& t) {
    const double beta = par.beta;
    const double q = beta / (beta - 1.0);
    const double coef = beta / (beta + 1.0);
    const double ex = (beta + 1.0) / (2.0 * beta);
    const Grid& g = w.grid();
    ScalarField wx(g), wy(g);
    fd_forward_gradient(w, wx, wy);
    double acc = 0.0;
    for (size_t i = 0; i < w.values().size(); ++i) {
        const double g2 = wx[i] * wx[i] + wy[i] * wy[i];
        acc += t.inv_tau * ((1.0 / q) * std::pow(std::abs(w[i]), q) - u_prev[i] * w[i]);
        acc -= t.drift[i] * w[i];
        acc += par.rho1 * coef * std::pow(g2 + t.delta2, ex);
        acc += par.epsilon * coef * std::pow(w[i] * w[i] + t.delta2, ex) * t.gamma[i];
    }
    return acc * w.grid().cell();
}

// Hessian-vector product at the current iterate. Coefficient fields are
// captured once per Newton iteration.
struct HessianCoeffs {
    ScalarField diag;        // (1/tau) Phi'' + eps B' gamma
    ScalarField a;           // q-Laplacian isotropic part
    ScalarField cxx, cxy, cyy;  // rank-one anisotropic part
    double rho1;
};

HessianCoeffs hessian_coeffs(const ScalarField& w, const ScalarField& wx, const ScalarField& wy,
                             const SchemeParams& par, const DensityTerms& t) {
    HessianCoeffs h{ScalarField(w.grid()), ScalarField(w.grid()), ScalarField(w.grid()),
                    ScalarField(w.grid()), ScalarField(w.grid()), par.rho1};
    const double phi_exp = (2.0 - par.beta) / (2.0 * (par.beta - 1.0));
    const double inv_bm1 = 1.0 / (par.beta - 1.0);
    const double one_over_beta = 1.0 / par.beta;
    for (size_t i = 0; i < w.values().size(); ++i) {
        const double w2d = w[i] * w[i] + t.delta2;
        const double phi2 = inv_bm1 * std::pow(w2d, phi_exp);
        const double bp = std::pow(w2d, t.nu - 1.0) * (t.delta2 + one_over_beta * w[i] * w[i]);
        h.diag[i] = t.inv_tau * phi2 + par.epsilon * bp * t.gamma[i];

        const double g2 = wx[i] * wx[i] + wy[i] * wy[i];
        const double a = std::pow(g2 + t.delta2, t.nu);
        const double c = 2.0 * t.nu * std::pow(g2 + t.delta2, t.nu - 1.0);
        h.a[i] = a;
        h.cxx[i] = c * wx[i] * wx[i];
        h.cxy[i] = c * wx[i] * wy[i];
        h.cyy[i] = c * wy[i] * wy[i];
    }
    return h;
}

ScalarField hessian_apply(const HessianCoeffs& h, const ScalarField& v) {
    const Grid& g = v.grid();
    ScalarField vx(g), vy(g), qlap(g);
    fd_forward_gradient(v, vx, vy);
    ScalarField fx = vx, fy = vy;
    for (size_t i = 0; i < fx.values().size(); ++i) {
        const double gx = vx[i], gy = vy[i];
        fx[i] = h.a[i] * gx + h.cxx[i] * gx + h.cxy[i] * gy;
        fy[i] = h.a[i] * gy + h.cxy[i] * gx + h.cyy[i] * gy;
    }
    fd_backward_divergence(fx, fy, qlap);
    ScalarField out = qlap;
    for (size_t i = 0; i < out.values().size(); ++i)
        out[i] = h.diag[i] * v[i] - h.rho1 * qlap[i];
    return out;
}

double dot_h(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.values().size(); ++i) s += a[i] * b[i];
    return s * a.grid().cell();
}

// Jacobi-preconditioned CG on H d = -F, relative tolerance on the residual.
int solve_newton_direction(const HessianCoeffs& h, const ScalarField& rhs_negF,
                           ScalarField& d, double rel_tol, int max_iter) {
    const Grid& g = rhs_negF.grid();
    d = ScalarField(g, 0.0);
    ScalarField r = rhs_negF;
    ScalarField z = r;
    for (size_t i = 0; i < z.values().size(); ++i) z[i] /= h.diag[i];
    ScalarField q = z;
    double rz = dot_h(r, z);
    const double target = rel_tol * l2h_norm(rhs_negF);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (l2h_norm(r) <= target) break;
        ScalarField hq = hessian_apply(h, q);
        const double alpha = rz / dot_h(q, hq);
        for (size_t i = 0; i < d.values().size(); ++i) {
            d[i] += alpha * q[i];
            r[i] -= alpha * hq[i];
        }
        for (size_t i = 0; i < z.values().size(); ++i) z[i] = r[i] / h.diag[i];
        const double rz_new = dot_h(r, z);
        const double beta_cg = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < q.values().size(); ++i) q[i] = z[i] + beta_cg * q[i];
    }
    return it;
}

}  // namespace

ScalarField density_residual(const ScalarField& w, const ScalarField& u_prev,
                             const ScalarField& p, const ScalarField& transport,
                             const SchemeParams& par) {
    DensityTerms t = make_terms(u_prev, p, transport, par);
    return residual_impl(w, u_prev, par, t);
}

double density_objective(const ScalarField& w, const ScalarField& u_prev, const ScalarField& p,
                         const ScalarField& transport, const SchemeParams& par) {
    DensityTerms t = make_terms(u_prev, p, transport, par);
    return objective_impl(w, u_prev, par, t);
}

DensityResult density_step(const ScalarField& u_prev, const ScalarField& p,
                           const ScalarField& transport, const SchemeParams& par,
                           const ScalarField* warm_start) {
    par.validate();
    require_finite(u_prev, "density_step u_prev");
    require_finite(transport, "density_step transport");
    DensityTerms t = make_terms(u_prev, p, transport, par);

    DensityResult out;
    out.w = warm_start ? *warm_start : spow(u_prev, par.beta - 1.0);

    ScalarField F = residual_impl(out.w, u_prev, par, t);
    out.residual = l2h_norm(F);
    double J = objective_impl(out.w, u_prev, par, t);
    int stagnant = 0;

    while (out.residual > par.inner_tol && out.newton_iters < par.inner_max) {
        ScalarField wx(out.w.grid()), wy(out.w.grid());
        fd_forward_gradient(out.w, wx, wy);
        HessianCoeffs h = hessian_coeffs(out.w, wx, wy, par, t);

        // Tighten the linear solve as the outer residual approaches target.
        const double rel = std::clamp(0.05 * par.inner_tol / out.residual, 1e-14, 1e-3);
        ScalarField neg_f = -1.0 * F;
        ScalarField d;
        solve_newton_direction(h, neg_f, d, rel, 400);

        double slope = dot_h(F, d);
        if (!(slope < 0.0)) {  // fallback direction: preconditioned steepest descent
            d = F;
            for (size_t i = 0; i < d.values().size(); ++i) d[i] = -F[i] / h.diag[i];
            slope = dot_h(F, d);
        }

        // Armijo on the objective, with a floor at the rounding noise of J so
        // the final quadratic-phase steps are not rejected spuriously.
        const double noise = 8.0 * 2.2e-16 * (1.0 + std::abs(J));
        double step = 1.0;
        ScalarField w_try = out.w;
        double J_try = 0.0;
        bool accepted_step = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (size_t i = 0; i < w_try.values().size(); ++i)
                w_try[i] = out.w[i] + step * d[i];
            J_try = objective_impl(w_try, u_prev, par, t);
            if (std::isfinite(J_try) && J_try <= J + 1e-4 * step * slope + noise) {
                accepted_step = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted_step) break;  // stagnated; report the residual we have

        const double prev_residual = out.residual;
        out.w = w_try;
        J = J_try;
        F = residual_impl(out.w, u_prev, par, t);
        out.residual = l2h_norm(F);
        ++out.newton_iters;
        stagnant = (out.residual >= 0.999 * prev_residual) ? stagnant + 1 : 0;
        if (stagnant >= 3) break;  // at the floating-point floor
    }

    out.converged = out.residual <= par.inner_tol && all_finite(out.w);
    return out;
}

namespace {

// E = int u^beta / beta + (beta-1)/(2 beta) int |grad p|^2, the scaled form of
// the Lyapunov functional the per-step estimate is written in.
double scheme_energy(const ScalarField& u, const ScalarField& p, double beta) {
    return integral(spow(u, beta)) / beta +
           (beta - 1.0) / (2.0 * beta) * spectral_weighted_energy(p, 1.0);
}

}  // namespace

StepResult coupled_step(const StepState& state, const SchemeParams& par) {
    par.validate();
    StepResult out;
    const ScalarField& u_prev = state.u;
    const ScalarField& p_prev = state.p;
    const double beta = par.beta;

    ScalarField z = u_prev;  // u-like Picard iterate
    ScalarField w_hint = spow(u_prev, beta - 1.0);
    ScalarField u_new = u_prev;
    ScalarField p = p_prev;
    ScalarField w = w_hint;

    int picard_iters = 0;
    int inner_total = 0;
    bool converged = false;
    for (int m = 0; m < par.picard_max; ++m) {
        ++picard_iters;
        p = pressure_step(p_prev, dealias(spow(z, beta)), par);
        DensityResult dres = density_step(u_prev, p, z, par, &w_hint);
        inner_total += dres.newton_iters;
        if (!dres.converged) {
            out.reason = "density solve did not converge (residual " +
                         std::to_string(dres.residual) + ")";
            out.diag.picard_iters = picard_iters;
            out.diag.inner_iters = inner_total;
            return out;
        }
        w = dres.w;
        w_hint = w;
        u_new = spow(w, 1.0 / (beta - 1.0));

        double gap2 = 0.0;
        for (size_t i = 0; i < z.values().size(); ++i) {
            const double dz = u_new[i] - z[i];
            gap2 += dz * dz;
            z[i] += par.theta * dz;
        }
        const double delta = par.theta * std::sqrt(gap2 * z.grid().cell());
        if (delta <= par.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        out.reason = "picard iteration did not converge";
        out.diag.picard_iters = picard_iters;
        out.diag.inner_iters = inner_total;
        return out;
    }

    // Final pressure solve against the accepted density so the discrete
    // pressure mass identity holds exactly (the de-aliasing filter keeps the
    // zero mode, so the recorded source mass equals int u^beta outright).
    const ScalarField source = dealias(spow(u_new, beta));
    p = pressure_step(p_prev, source, par);

    StepDiagnostics d;
    d.tau_used = par.tau;
    d.picard_iters = picard_iters;
    d.inner_iters = inner_total;
    d.min_u = field_min(u_new);
    d.min_p = field_min(p);
    d.max_u = field_max(u_new);
    d.max_p = field_max(p);

    const double u_scale = std::max(linf_norm(u_new), 1e-300);
    const double p_scale = std::max(linf_norm(p), 1e-300);
    if (d.min_u < -par.tol_neg * u_scale) {
        out.reason = "density lost nonnegativity beyond tolerance";
        out.diag = d;
        return out;
    }
    if (d.min_p < -par.tol_neg * p_scale) {
        out.reason = "pressure lost nonnegativity beyond tolerance";
        out.diag = d;
        return out;
    }

    d.mass_u_before = integral(u_prev);
    d.mass_u_after = integral(u_new);
    d.mass_p_before = integral(p_prev);
    d.mass_p_after = integral(p);
    d.source_mass = integral(source);

    // Per-step energy estimate bookkeeping, in the scaled form
    //   (E_k - E_{k-1})/tau + rho1 Dw + eps De + (b-1)/b (Ds + rho2 D2) <= slack.
    const double e_prev = scheme_energy(u_prev, p_prev, beta);
    const double e_new = scheme_energy(u_new, p, beta);
    d.energy_before = beta / (beta - 1.0) * e_prev;
    d.energy_after = beta / (beta - 1.0) * e_new;
    d.dissipation_s = spectral_weighted_energy(p, par.s + 1.0);
    d.diss_lap = spectral_weighted_energy(p, 2.0);

    {
        const double delta = density_delta(u_prev, par);
        const double delta2 = delta * delta;
        const double nu = (1.0 - beta) / (2.0 * beta);
        const ScalarField gamma = weight_field(u_prev.grid());
        ScalarField wx(w.grid()), wy(w.grid());
        fd_forward_gradient(w, wx, wy);
        double dw = 0.0, de = 0.0, leak = 0.0;
        for (size_t i = 0; i < w.values().size(); ++i) {
            const double g2 = wx[i] * wx[i] + wy[i] * wy[i];
            const double b = std::pow(w[i] * w[i] + delta2, nu) * w[i];
            dw += std::pow(g2 + delta2, nu) * g2;
            de += b * w[i] * gamma[i];
            leak += b * gamma[i];
        }
        d.diss_w = dw * w.grid().cell();
        d.diss_eps = de * w.grid().cell();
        d.eps_leak_rate = leak * w.grid().cell();
    }

    d.energy_slack = (e_prev - e_new) / par.tau - par.rho1 * d.diss_w - par.epsilon * d.diss_eps -
                     (beta - 1.0) / beta * (d.dissipation_s + par.rho2 * d.diss_lap);

    const double h_scale = std::max(d.energy_before, 1e-300);
    if (d.energy_slack < -par.slack_tol * h_scale) {
        out.reason = "discrete energy inequality violated (slack " +
                     std::to_string(d.energy_slack) + ")";
        out.diag = d;
        return out;
    }

    d.residual_u = l2h_norm(density_residual(w, u_prev, p, u_new, par));
    d.residual_p = pressure_residual(p, p_prev, source, par);
    d.boundary_indicator =
        std::max(boundary_contamination(u_new), boundary_contamination(p));

    out.accepted = true;
    out.state = StepState{std::move(u_new), std::move(p), state.time + par.tau};
    d.time = out.state.time;
    out.diag = d;
    return out;
}

EvolveResult evolve(const StepState& initial, const SchemeParams& par, const EvolveOptions& opt) {
    par.validate();
    if (!(opt.horizon > 0.0)) throw std::invalid_argument("evolve: horizon must be positive");

    EvolveResult res;
    res.params = par;

    SchemeParams cur = par;
    const double tau_floor = par.tau * opt.tau_floor_factor;
    StepState state = initial;

    const EnergyReport e0 = lyapunov_energy(initial.u, initial.p, par.beta, par.s);
    res.h0 = e0.total;

    StepDiagnostics row0;
    row0.step = 0;
    row0.time = initial.time;
    row0.tau_used = par.tau;
    row0.mass_u_before = row0.mass_u_after = e0.mass_u;
    row0.mass_p_before = row0.mass_p_after = e0.mass_p;
    row0.energy_before = row0.energy_after = e0.total;
    row0.dissipation_s = e0.dissipation;
    row0.source_mass = integral(spow(initial.u, par.beta));
    row0.min_u = field_min(initial.u);
    row0.min_p = field_min(initial.p);
    row0.max_u = field_max(initial.u);
    row0.max_p = field_max(initial.p);
    row0.boundary_indicator =
        std::max(boundary_contamination(initial.u), boundary_contamination(initial.p));
    res.series.push_back(row0);

    if (opt.store_trajectory) {
        res.trajectory.grid = initial.u.grid();
        res.trajectory.times.push_back(initial.time);
        res.trajectory.u.push_back(initial.u);
        res.trajectory.p.push_back(initial.p);
    }

    const double t_end = initial.time + opt.horizon;
    int step = 0;
    res.completed = true;
    while (state.time < t_end - 0.5 * cur.tau) {
        StepResult sr = coupled_step(state, cur);
        if (!sr.accepted) {
            const bool retryable = sr.reason.find("converge") != std::string::npos;
            if (opt.retry_halve_tau && retryable && cur.tau * 0.5 >= tau_floor) {
                cur.tau *= 0.5;
                continue;
            }
            res.completed = false;
            res.abort_reason = "step " + std::to_string(step + 1) + " rejected: " + sr.reason;
            break;
        }
        state = std::move(sr.state);
        ++step;
        sr.diag.step = step;
        res.series.push_back(sr.diag);
        if (opt.store_trajectory &&
            (step % std::max(1, opt.snapshot_every) == 0 || state.time >= t_end - 0.5 * cur.tau)) {
            res.trajectory.times.push_back(state.time);
            res.trajectory.u.push_back(state.u);
            res.trajectory.p.push_back(state.p);
        }
    }
    res.final_state = state;

    const double beta = par.beta;
    for (size_t k = 1; k < res.series.size(); ++k) {
        const StepDiagnostics& d = res.series[k];
        res.cumulative_dissipation +=
            d.tau_used * (par.rho1 * d.diss_w + par.epsilon * d.diss_eps +
                          (beta - 1.0) / beta * (d.dissipation_s + par.rho2 * d.diss_lap));
        res.budget_gap += d.tau_used * d.energy_slack;
    }
    res.energy_drop = (beta - 1.0) / beta *
                      (res.series.front().energy_after - res.series.back().energy_after);

    if (!opt.out_dir.empty()) write_run_outputs(opt.out_dir, res);
    return res;
}

}  // namespace fpm
