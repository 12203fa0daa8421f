#include "fpm/selftest.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <sstream>

#include "fpm/cutoff.hpp"
#include "fpm/energy.hpp"
#include "fpm/io.hpp"
#include "fpm/ladder.hpp"
#include "fpm/oracle_minimize.hpp"
#include "fpm/quadrature.hpp"
#include "fpm/random_field.hpp"
#include "fpm/spectral.hpp"
#include "fpm/stepper.hpp"

namespace fpm {

namespace {

using Clock = std::chrono::steady_clock;

std::string with_time(const std::string& stat, Clock::time_point t0) {
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream os;
    os << stat << " [" << format_double(std::round(secs * 10.0) / 10.0) << "s]";
    return os.str();
}

SchemeParams default_params() { return SchemeParams{}; }

StepState gaussian_state(const Grid& g, double amp_u, double width_u) {
    StepState st;
    st.u = sample(g, [=](double x, double y) {
        return amp_u * std::exp(-(x * x + y * y) / (2.0 * width_u * width_u));
    });
    st.p = ScalarField(g, 0.0);
    return st;
}

// ---- 1. operator correctness -------------------------------------------

CriterionResult criterion_operators(bool quick) {
    const auto t0 = Clock::now();
    CriterionResult res{1, "operator correctness (multiplier + principal value)", false, ""};

    // Multiplier on a pure mode.
    const Grid gc = make_grid(64, M_PI);
    const ScalarField cos2x = sample(gc, [](double x, double) { return std::cos(2.0 * x); });
    double worst_mult = 0.0;
    for (double s : {0.3, 0.5, 0.75, 1.0}) {
        const ScalarField out = fractional_laplacian(cos2x, s);
        const double factor = std::pow(4.0, s);
        double err = 0.0;
        for (size_t i = 0; i < out.values().size(); ++i)
            err = std::max(err, std::abs(out[i] - factor * cos2x[i]));
        worst_mult = std::max(worst_mult, err / factor);
    }
    if (worst_mult > 1e-12) {
        res.stat = with_time("multiplier relative error " + format_double(worst_mult), t0);
        return res;
    }

    // Spectral vs principal-value quadrature on a Gaussian bump. The
    // disagreement at desk scale is dominated by the periodic images the
    // spectral side sees, so the refinement axis is the box: doubling L at
    // fixed spacing pushes the images twice as far and the agreement
    // improves by (2L)^(2+2s)-ish.
    const double sigma = 1.5;
    auto gauss = [=](double x, double y) {
        return std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    };
    const double s = 0.75;

    auto probe_error = [&](int n, double box_half) {
        const Grid g = make_grid(n, box_half);
        const ScalarField spec = fractional_laplacian(sample(g, gauss), s);
        const int c = n / 2;
        const int probes[10][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 1}, {-2, 2},
                                   {3, 0}, {0, -3}, {-4, 1}, {4, -2}, {2, 3}};
        double ref_peak = 0.0;
        for (auto& pr : probes)
            ref_peak = std::max(ref_peak, std::abs(spec(c + pr[0], c + pr[1])));
        PvOptions opt;
        opt.far_radius = 2.0 * box_half;
        double worst = 0.0;
        for (auto& pr : probes) {
            const int ix = c + pr[0], iy = c + pr[1];
            const PvResult q =
                fractional_laplacian_quadrature(gauss, s, g.coord(ix), g.coord(iy), opt);
            const double denom = std::max(std::abs(spec(ix, iy)), 0.1 * ref_peak);
            worst = std::max(worst, std::abs(q.value - spec(ix, iy)) / denom);
        }
        return worst;
    };

    const int n_base = quick ? 64 : 128;
    const double err_base = probe_error(n_base, 20.0);
    const double err_refined = probe_error(2 * n_base, 40.0);  // same spacing, images 2x farther

    res.pass = err_base <= 1e-3 && err_refined < 0.9 * err_base;
    res.stat = with_time("multiplier err " + format_double(worst_mult) + ", pv err " +
                             format_double(err_base) + " -> " + format_double(err_refined) +
                             " under box refinement",
                         t0);
    return res;
}

// ---- 2. cutoff decay ------------------------------------------------------

CriterionResult criterion_cutoff_decay(bool quick) {
    const auto t0 = Clock::now();
    CriterionResult res{2, "cutoff decay (algebraic eta_R, s = 0.75)", false, ""};
    const Grid g = make_grid(quick ? 256 : 512, 40.0);
    const double radii[4] = {1.0, 2.0, 4.0, 8.0};
    const DecayStudy study = cutoff_decay_study(5.0, 0.75, radii, g);
    bool decreasing = true;
    for (size_t i = 1; i < study.rows.size(); ++i)
        decreasing = decreasing && study.rows[i].sup_norm < study.rows[i - 1].sup_norm;
    res.pass = decreasing && study.fitted_exponent >= 0.8;
    std::ostringstream os;
    os << "sup norms";
    for (const DecayRow& r : study.rows) os << ' ' << format_double(r.sup_norm);
    os << ", fitted exponent " << format_double(study.fitted_exponent);
    res.stat = with_time(os.str(), t0);
    return res;
}

// ---- 3/4/5. default runs ---------------------------------------------------

struct DefaultRuns {
    EvolveResult with_eps;
    EvolveResult no_eps;
    double area = 0.0;
    double elapsed = 0.0;
};

DefaultRuns make_default_runs(bool quick) {
    const auto t0 = Clock::now();
    const Grid g = make_grid(quick ? 64 : 128, 20.0);
    const StepState st = gaussian_state(g, 1.0, 2.0);
    SchemeParams par = default_params();
    EvolveOptions opt;
    opt.horizon = (quick ? 50 : 200) * par.tau;
    opt.snapshot_every = 50;
    opt.store_trajectory = false;
    DefaultRuns runs;
    runs.area = g.area();
    runs.with_eps = evolve(st, par, opt);
    SchemeParams par0 = par;
    par0.epsilon = 0.0;
    runs.no_eps = evolve(st, par0, opt);
    runs.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    return runs;
}

CriterionResult criterion_energy_inequality(const DefaultRuns& runs) {
    const auto t0 = Clock::now();
    CriterionResult res{3, "discrete energy inequality (default run)", false, ""};
    if (!runs.with_eps.completed) {
        res.stat = with_time("run aborted: " + runs.with_eps.abort_reason, t0);
        return res;
    }
    BudgetSeries series{runs.with_eps.params, runs.area, runs.with_eps.series};
    const CheckReport rep = check_energy_budget(series);
    const double h0 = std::max(series.h0(), 1e-300);
    double worst_slack = std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < series.rows.size(); ++k)
        worst_slack = std::min(worst_slack, series.rows[k].energy_slack);
    res.pass = rep.pass && worst_slack >= -1e-8 * h0;
    res.stat = with_time("worst per-step slack " + format_double(worst_slack) + " vs bound " +
                             format_double(-1e-8 * h0) + "; " + rep.detail + " (runs took " +
                             format_double(std::round(runs.elapsed)) + "s)",
                         t0);
    return res;
}

CriterionResult criterion_mass_laws(const DefaultRuns& runs) {
    const auto t0 = Clock::now();
    CriterionResult res{4, "mass laws (eps = 0 conservation + pressure identity)", false, ""};
    if (!runs.no_eps.completed) {
        res.stat = with_time("run aborted: " + runs.no_eps.abort_reason, t0);
        return res;
    }
    BudgetSeries series0{runs.no_eps.params, runs.area, runs.no_eps.series};
    const CheckReport mass = check_density_mass(series0);
    const CheckReport pm0 = check_pressure_mass(series0);
    BudgetSeries series1{runs.with_eps.params, runs.area, runs.with_eps.series};
    const CheckReport pm1 = check_pressure_mass(series1);

    const double m0 = series0.rows.front().mass_u_after;
    double drift = 0.0;
    for (const StepDiagnostics& d : series0.rows)
        drift = std::max(drift, std::abs(d.mass_u_after - m0));
    res.pass = mass.pass && pm0.pass && pm1.pass;
    res.stat = with_time("mass drift " + format_double(drift / std::max(std::abs(m0), 1e-300)) +
                             " relative; pressure identity worst " + format_double(pm0.worst) +
                             " / " + format_double(pm1.worst),
                         t0);
    return res;
}

CriterionResult criterion_nonnegativity(const DefaultRuns& runs) {
    const auto t0 = Clock::now();
    CriterionResult res{5, "nonnegativity of u and p (default run)", false, ""};
    if (!runs.with_eps.completed) {
        res.stat = with_time("run aborted: " + runs.with_eps.abort_reason, t0);
        return res;
    }
    BudgetSeries series{runs.with_eps.params, runs.area, runs.with_eps.series};
    const CheckReport rep = check_nonnegativity(series);
    res.pass = rep.pass;
    res.stat = with_time(rep.detail, t0);
    return res;
}

// ---- 6. density-step oracle -------------------------------------------------

CriterionResult criterion_density_oracle(bool quick) {
    const auto t0 = Clock::now();
    CriterionResult res{6, "density step vs direct convex minimization (8x8)", false, ""};
    const Grid g = make_grid(8, 5.0);
    const int instances = quick ? 6 : 20;
    const double betas[4] = {1.6, 2.0, 2.4, 3.0};
    double worst = 0.0;
    for (int i = 0; i < instances; ++i) {
        SchemeParams par;
        par.beta = betas[i % 4];
        par.s = 0.75;
        par.tau = 0.1;
        par.rho1 = 0.05;
        par.rho2 = 0.0;
        par.epsilon = 0.05;
        par.delta_grad = 1e-6;
        par.inner_tol = 1e-12;
        par.inner_max = 200;

        ScalarField u_prev = random_nonnegative(g, 100 + i, 2, 1.0);
        for (double& v : u_prev.values()) v += 0.2;
        ScalarField z = random_nonnegative(g, 200 + i, 2, 0.8);
        for (double& v : z.values()) v += 0.1;
        const ScalarField p = random_band_limited(g, 300 + i, 2, 0.4);

        const DensityResult solved = density_step(u_prev, p, z, par);
        if (!solved.converged) {
            res.stat = with_time("solver failed to converge on instance " + std::to_string(i), t0);
            return res;
        }

        auto objective = [&](const std::vector<double>& x) {
            ScalarField w(g);
            w.values() = x;
            return density_objective(w, u_prev, p, z, par);
        };
        OracleOptions opt;
        opt.grad_tol = 2e-7;
        opt.max_iters = 8000;
        const OracleResult oracle =
            minimize_by_values(objective, std::vector<double>(g.size(), 0.5), opt);
        if (!oracle.converged) {
            res.stat = with_time("oracle stalled on instance " + std::to_string(i) +
                                     " (grad norm " + format_double(oracle.grad_norm) + ")",
                                 t0);
            return res;
        }
        ScalarField w_oracle(g);
        w_oracle.values() = oracle.x;
        worst = std::max(worst, l2h_norm(solved.w - w_oracle));
    }
    res.pass = worst <= 1e-6;
    res.stat = with_time("worst L2 gap " + format_double(worst) + " over " +
                             std::to_string(instances) + " instances",
                         t0);
    return res;
}

// ---- 7. linear-flow tau ladder ---------------------------------------------

CriterionResult criterion_linear_ladder(bool quick) {
    const auto t0 = Clock::now();
    CriterionResult res{7, "linear pressure flow: tau order vs exact symbol", false, ""};
    const Grid g = make_grid(64, 20.0);
    StepState st;
    st.u = ScalarField(g, 0.0);
    st.p = sample(g, [](double x, double y) {
        return std::exp(-(x * x + y * y) / (2.0 * 3.0 * 3.0));
    });

    SchemeParams base = default_params();
    base.epsilon = 0.0;
    base.rho1 = 0.0;
    base.rho2 = 0.0;
    const double horizon = quick ? 0.04 : 0.08;

    // Exact mode-wise decay exp(-|k|^(2s) t) of the initial pressure.
    Spectrum ph = forward_fft(st.p);
    const int nh = g.n / 2 + 1;
    for (int sx = 0; sx < g.n; ++sx) {
        const double kx = g.wave_deriv[sx];
        for (int sy = 0; sy < nh; ++sy) {
            const double ky = g.wave_deriv[sy];
            const double k2 = kx * kx + ky * ky;
            const double mu = (k2 == 0.0) ? 0.0 : std::pow(k2, base.s);
            ph[static_cast<size_t>(sx) * nh + sy] *= std::exp(-mu * horizon);
        }
    }
    const ScalarField exact = inverse_fft(ph, g);

    std::vector<double> taus, errs;
    for (int i = 0; i < 4; ++i) {
        SchemeParams par = base;
        par.tau = 4e-3 * std::pow(0.5, i);
        EvolveOptions opt;
        opt.horizon = horizon;
        opt.snapshot_every = 1 << 20;  // endpoints only
        opt.store_trajectory = false;
        const EvolveResult run = evolve(st, par, opt);
        if (!run.completed) {
            res.stat = with_time("rung aborted: " + run.abort_reason, t0);
            return res;
        }
        taus.push_back(par.tau);
        errs.push_back(l2h_norm(run.final_state.p - exact));
    }
    // Least-squares slope of log(err) against log(tau).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < taus.size(); ++i) {
        const double lx = std::log(taus[i]), ly = std::log(errs[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(taus.size());
    const double order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    res.pass = order >= 0.8 && order <= 1.2;
    std::ostringstream os;
    os << "errors";
    for (double e : errs) os << ' ' << format_double(e);
    os << ", fitted order " << format_double(order);
    res.stat = with_time(os.str(), t0);
    return res;
}

// ---- 8/9. nonlinear ladders --------------------------------------------------

struct NonlinearLadders {
    LadderReport eps, tau, rho2, rho1;
    bool ok = false;
    double elapsed = 0.0;
    std::string failure;
};

NonlinearLadders make_nonlinear_ladders(bool quick) {
    const auto t0 = Clock::now();
    NonlinearLadders out;
    const Grid g = make_grid(64, 20.0);
    const StepState st = gaussian_state(g, 1.0, 2.0);

    LadderSpec spec;
    spec.initial = st;
    spec.base = default_params();
    spec.start = 1e-3;
    spec.ratio = 0.5;
    spec.count = 4;
    spec.horizon = quick ? 0.02 : 0.04;
    spec.snapshot_every = 5;

    spec.parameter = SweepParameter::epsilon;
    out.eps = run_ladder(spec);

    spec.base.epsilon = 0.0;
    spec.parameter = SweepParameter::tau;
    out.tau = run_ladder(spec);

    spec.parameter = SweepParameter::rho2;
    out.rho2 = run_ladder(spec);

    spec.base.rho2 = 0.0;
    spec.parameter = SweepParameter::rho1;
    out.rho1 = run_ladder(spec);

    out.ok = true;
    out.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

std::string cauchy_summary(const LadderReport& rep) {
    std::ostringstream os;
    os << to_string(rep.parameter) << (rep.pass ? " ok (" : " FAIL (");
    for (size_t i = 0; i < rep.cauchy_u.size(); ++i)
        os << (i ? " " : "") << format_double(rep.cauchy_u[i]);
    os << ")";
    return os.str();
}

CriterionResult criterion_nonlinear_ladders(const NonlinearLadders& lad) {
    const auto t0 = Clock::now();
    CriterionResult res{8, "regularization ladders: monotone interior Cauchy metrics", false, ""};
    res.pass = lad.eps.pass && lad.tau.pass && lad.rho2.pass && lad.rho1.pass;
    res.stat = with_time(cauchy_summary(lad.eps) + "; " + cauchy_summary(lad.tau) + "; " +
                             cauchy_summary(lad.rho2) + "; " + cauchy_summary(lad.rho1) +
                             " (runs took " + format_double(std::round(lad.elapsed)) + "s)",
                         t0);
    return res;
}

double growth_slope(const std::vector<double>& values, const std::vector<double>& norms) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        const double lx = std::log(values[i]);
        const double ly = std::log(std::max(norms[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -slope;  // positive when the norm grows as the parameter shrinks
}

CriterionResult criterion_norm_monitors(const NonlinearLadders& lad) {
    const auto t0 = Clock::now();
    CriterionResult res{9, "rho1-uniform norm monitors (no growth trend)", false, ""};
    if (lad.rho1.values.empty()) {
        res.stat = with_time("rho1 ladder missing", t0);
        return res;
    }
    const double g_lbeta1 = growth_slope(lad.rho1.values, lad.rho1.lbeta1_u);
    const double g_suph = growth_slope(lad.rho1.values, lad.rho1.sup_h);
    res.pass = g_lbeta1 <= 0.05 && g_suph <= 0.05;
    res.stat = with_time("growth slopes: L^{beta+1} " + format_double(g_lbeta1) + ", sup H " +
                             format_double(g_suph),
                         t0);
    return res;
}

// ---- 10. elementary devices ---------------------------------------------------

CriterionResult criterion_devices(bool quick) {
    const auto t0 = Clock::now();
    CriterionResult res{10, "truncation / G_delta devices and exponent r", false, ""};
    const Grid g = make_grid(32, 10.0);
    const int pairs = quick ? 5 : 20;
    const double beta = 2.0;
    const double k_list[5] = {0.1, 0.3, 0.6, 1.0, 1.5};

    for (int i = 0; i < pairs; ++i) {
        const ScalarField a = random_nonnegative(g, 1000 + i, 3, 1.5);
        const ScalarField b = random_nonnegative(g, 2000 + i, 3, 1.2);
        const auto rows = truncation_probe(a, b, k_list, beta);
        for (size_t bi = 0; bi < rows.front().values.size(); ++bi) {
            double prev = -1e-13;
            for (const TruncationRow& row : rows) {
                if (row.values[bi] < -1e-12 || row.values[bi] < prev - 1e-12) {
                    res.stat = with_time("truncation monotonicity failed (pair " +
                                             std::to_string(i) + ")",
                                         t0);
                    return res;
                }
                prev = row.values[bi];
            }
        }
    }

    std::vector<double> deltas;
    for (int j = 0; j <= 7; ++j) deltas.push_back(2.0 * std::pow(0.5, j));
    for (int i = 0; i < pairs; ++i) {
        const ScalarField p = random_nonnegative(g, 3000 + i, 3, 1.0);
        const auto rows = gdelta_probe(p, deltas);
        for (size_t j = 1; j < rows.size(); ++j)
            if (rows[j].value < rows[j - 1].value - 1e-12) {
                res.stat = with_time("G_delta monotonicity failed (field " + std::to_string(i) +
                                         ")",
                                     t0);
                return res;
            }
        const double limit = positive_part_mass(p);
        const double gap = limit - rows.back().value;
        if (gap < -1e-10 || gap > deltas.back() * g.area()) {
            res.stat = with_time("G_delta limit failed (field " + std::to_string(i) + ")", t0);
            return res;
        }
    }

    if (std::abs(interpolation_exponent(2.0) - 3.0) > 1e-14) {
        res.stat = with_time("r(2) != 3", t0);
        return res;
    }
    for (double beta_s : {1.01, 1.5, 2.0, 3.7, 5.0, 10.0})
        if (!(interpolation_exponent(beta_s) > beta_s)) {
            res.stat = with_time("r <= beta at beta = " + format_double(beta_s), t0);
            return res;
        }

    res.pass = true;
    res.stat = with_time("all device checks passed (" + std::to_string(pairs) + " samples)", t0);
    return res;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(bool quick) {
    std::vector<CriterionResult> out;
    out.push_back(criterion_operators(quick));
    out.push_back(criterion_cutoff_decay(quick));
    const DefaultRuns runs = make_default_runs(quick);
    out.push_back(criterion_energy_inequality(runs));
    out.push_back(criterion_mass_laws(runs));
    out.push_back(criterion_nonnegativity(runs));
    out.push_back(criterion_density_oracle(quick));
    out.push_back(criterion_linear_ladder(quick));
    const NonlinearLadders ladders = make_nonlinear_ladders(quick);
    out.push_back(criterion_nonlinear_ladders(ladders));
    out.push_back(criterion_norm_monitors(ladders));
    out.push_back(criterion_devices(quick));
    return out;
}

}  // namespace fpm
