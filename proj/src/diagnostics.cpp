#include "fpm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fpm/energy.hpp"
#include "fpm/io.hpp"
#include "fpm/spectral.hpp"

namespace fpm {

namespace {

constexpr double kPressureMassTol = 1e-10;

double scaled_energy(double h, double beta) { return (beta - 1.0) / beta * h; }

}  // namespace

CheckReport check_energy_budget(const BudgetSeries& series) {
    CheckReport rep;
    rep.name = "check_energy_budget";
    if (series.rows.size() < 2) {
        rep.pass = true;
        rep.detail = "no steps recorded";
        return rep;
    }
    const double beta = series.params.beta;
    const double h0 = std::max(series.h0(), 1e-300);
    const double bound = -series.params.slack_tol * h0;

    double cumulative = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    bool pass = true;
    std::string detail;
    for (size_t k = 1; k < series.rows.size(); ++k) {
        const StepDiagnostics& d = series.rows[k];
        const double e_prev = scaled_energy(d.energy_before, beta);
        const double e_cur = scaled_energy(d.energy_after, beta);
        const double slack = (e_prev - e_cur) / d.tau_used - series.params.rho1 * d.diss_w -
                             series.params.epsilon * d.diss_eps -
                             (beta - 1.0) / beta *
                                 (d.dissipation_s + series.params.rho2 * d.diss_lap);
        const double consistency_tol =
            1e-6 * (1.0 + std::abs(e_prev - e_cur) / d.tau_used + d.dissipation_s + d.diss_w) +
            1e-11 * h0 / d.tau_used;
        if (std::abs(slack - d.energy_slack) > consistency_tol) {
            pass = false;
            if (detail.empty())
                detail = "recorded slack disagrees with the recomputed value at step " +
                         std::to_string(d.step);
        }
        cumulative += d.tau_used * slack;
        worst = std::min({worst, slack, cumulative});
        if (slack < bound) {
            pass = false;
            if (detail.empty())
                detail = "per-step slack " + format_double(slack) + " below bound at step " +
                         std::to_string(d.step);
        }
        if (cumulative < bound) {
            pass = false;
            if (detail.empty())
                detail = "cumulative budget " + format_double(cumulative) +
                         " below bound at step " + std::to_string(d.step);
        }
    }
    rep.pass = pass;
    rep.worst = worst;
    rep.detail = pass ? "worst slack " + format_double(worst) : detail;
    return rep;
}

CheckReport check_pressure_mass(const BudgetSeries& series) {
    CheckReport rep;
    rep.name = "check_pressure_mass";
    double worst = 0.0;
    bool pass = true;
    std::string detail;
    double c_rate = 0.0;
    for (size_t k = 1; k < series.rows.size(); ++k) {
        const StepDiagnostics& d = series.rows[k];
        const double residual =
            d.mass_p_after - d.mass_p_before - d.tau_used * d.source_mass;
        const double scale = std::max({std::abs(d.mass_p_after), std::abs(d.mass_p_before),
                                       std::abs(d.tau_used * d.source_mass), 1.0});
        worst = std::max(worst, std::abs(residual) / scale);
        if (std::abs(residual) > kPressureMassTol * scale) {
            pass = false;
            if (detail.empty())
                detail = "identity residual " + format_double(residual) + " at step " +
                         std::to_string(d.step);
        }
        c_rate = std::max(c_rate, d.source_mass);
    }
    // Linear-in-time bound with the reported rate constant.
    const double m0 = series.rows.empty() ? 0.0 : series.rows.front().mass_p_after;
    const double t0 = series.rows.empty() ? 0.0 : series.rows.front().time;
    for (size_t k = 1; k < series.rows.size(); ++k) {
        const StepDiagnostics& d = series.rows[k];
        const double bound = m0 + c_rate * (d.time - t0);
        if (d.mass_p_after > bound * (1.0 + 1e-12) + 1e-12) {
            pass = false;
            if (detail.empty())
                detail = "mass of p exceeds the linear bound at step " + std::to_string(d.step);
        }
    }
    rep.pass = pass;
    rep.worst = worst;
    rep.detail = pass ? "worst scaled residual " + format_double(worst) +
                            ", rate constant " + format_double(c_rate)
                      : detail;
    return rep;
}

CheckReport check_nonnegativity(const BudgetSeries& series) {
    CheckReport rep;
    rep.name = "check_nonnegativity";
    const double tol = series.params.tol_neg;
    double worst = 0.0;
    bool pass = true;
    std::string detail;
    for (const StepDiagnostics& d : series.rows) {
        const double u_scale = std::max(std::abs(d.max_u), 1e-300);
        const double p_scale = std::max(std::abs(d.max_p), 1e-300);
        worst = std::min({worst, d.min_u / u_scale, d.min_p / p_scale});
        if (d.min_u < -tol * u_scale || d.min_p < -tol * p_scale) {
            pass = false;
            if (detail.empty())
                detail = "negative undershoot beyond tolerance at step " + std::to_string(d.step);
        }
    }
    rep.pass = pass;
    rep.worst = worst;
    rep.detail = pass ? "worst scaled minimum " + format_double(worst) : detail;
    return rep;
}

CheckReport check_density_mass(const BudgetSeries& series) {
    CheckReport rep;
    rep.name = "check_density_mass";
    const double eps = series.params.epsilon;
    const double sqrt_area = series.area > 0.0 ? std::sqrt(series.area) : 40.0;
    double worst = 0.0;
    bool pass = true;
    std::string detail;
    const double mass0 =
        series.rows.empty() ? 0.0 : std::abs(series.rows.front().mass_u_after);
    for (size_t k = 1; k < series.rows.size(); ++k) {
        const StepDiagnostics& d = series.rows[k];
        const double scale = std::max(std::abs(d.mass_u_before), 1.0);
        // Per-step budget: the mass moves only through the eps drain, up to
        // the integral of the solver residual.
        const double residual =
            d.mass_u_after - d.mass_u_before + eps * d.tau_used * d.eps_leak_rate;
        const double allowed =
            10.0 * d.tau_used * sqrt_area * std::max(series.params.inner_tol, d.residual_u) +
            1e-13 * scale;
        worst = std::max(worst, std::abs(residual) / scale);
        if (std::abs(residual) > allowed) {
            pass = false;
            if (detail.empty())
                detail = "density mass budget residual " + format_double(residual) +
                         " at step " + std::to_string(d.step);
        }
        // With eps = 0 the mass is conserved outright.
        if (eps == 0.0 && std::abs(d.mass_u_after - series.rows.front().mass_u_after) >
                              1e-10 * std::max(mass0, 1e-300)) {
            pass = false;
            if (detail.empty())
                detail = "mass drift beyond 1e-10 relative at step " + std::to_string(d.step);
        }
    }
    rep.pass = pass;
    rep.worst = worst;
    rep.detail = pass ? "worst scaled budget residual " + format_double(worst) : detail;
    return rep;
}

TheoremNorms check_theorem_norms(const Trajectory& traj, double beta, double s) {
    TheoremNorms out;
    if (traj.times.empty()) {
        out.all_finite = true;
        return out;
    }
    const double r = interpolation_exponent(beta);
    double acc_b1 = 0.0, acc_r = 0.0, acc_hs = 0.0;
    for (size_t j = 0; j < traj.times.size(); ++j) {
        const ScalarField& u = traj.u[j];
        const ScalarField& p = traj.p[j];
        out.sup_l1_u = std::max(out.sup_l1_u, lp_norm(u, 1.0));
        out.sup_lbeta_u = std::max(out.sup_lbeta_u, lp_norm(u, beta));
        out.sup_h1_p = std::max(out.sup_h1_p, h1_norm(p));
        out.sup_weighted_u =
            std::max(out.sup_weighted_u, weighted_lp_norm(u, (1.0 + beta) / beta));
        if (j > 0) {
            const double dt = traj.times[j] - traj.times[j - 1];
            acc_b1 += dt * std::pow(lp_norm(u, beta + 1.0), beta + 1.0);
            acc_r += dt * std::pow(lp_norm(u, r), r);
            const double hs = hs_norm(p, s + 1.0);
            acc_hs += dt * hs * hs;
        }
    }
    out.lbeta1_spacetime_u = std::pow(acc_b1, 1.0 / (beta + 1.0));
    out.lr_spacetime_u = std::pow(acc_r, 1.0 / r);
    out.l2_hs1_p = std::sqrt(acc_hs);
    out.all_finite = std::isfinite(out.sup_l1_u) && std::isfinite(out.sup_lbeta_u) &&
                     std::isfinite(out.lbeta1_spacetime_u) && std::isfinite(out.lr_spacetime_u) &&
                     std::isfinite(out.sup_h1_p) && std::isfinite(out.l2_hs1_p) &&
                     std::isfinite(out.sup_weighted_u);
    return out;
}

std::vector<double> divcurl_monitor(const Trajectory& traj) {
    std::vector<double> series;
    for (size_t j = 1; j < traj.times.size(); ++j) {
        const double dt = traj.times[j] - traj.times[j - 1];
        const ScalarField& u = traj.u[j];
        const ScalarField& p = traj.p[j];
        const ScalarField& p_prev = traj.p[j - 1];
        auto [px, py] = gradient(p);
        double acc = 0.0;
        for (size_t i = 0; i < u.values().size(); ++i) {
            const double dtp = (p[i] - p_prev[i]) / dt;
            acc += u[i] * (dtp - (px[i] * px[i] + py[i] * py[i]));
        }
        series.push_back(acc * u.grid().cell());
    }
    return series;
}

namespace {

// C-infinity step: 1 at t <= 0, 0 at t >= 1.
double smooth_step_down(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

// Plateau bump in one variable: 1 on [0, t0], smooth descent to 0 at 1.
double plateau(double t, double t0) {
    if (t <= t0) return 1.0;
    return smooth_step_down((t - t0) / (1.0 - t0));
}

struct BumpSpec {
    double cx, cy, hw;  // in fractions of L
};

// Centers and halfwidths of the battery, fractions of L; plateau fraction is
// 0.5 of the halfwidth, so entry 0 is identically 1 on [-L/4, L/4]^2.
constexpr BumpSpec kBattery[8] = {
    {0.00, 0.00, 0.50}, {0.00, 0.00, 0.20}, {0.30, 0.00, 0.25}, {-0.30, 0.00, 0.25},
    {0.00, 0.30, 0.25}, {0.00, -0.30, 0.25}, {0.25, 0.25, 0.30}, {-0.25, -0.25, 0.30},
};

}  // namespace

std::vector<ScalarField> test_function_battery(const Grid& g) {
    std::vector<ScalarField> battery;
    battery.reserve(8);
    const double L = g.box_half;
    for (const BumpSpec& b : kBattery) {
        const double cx = b.cx * L, cy = b.cy * L, hw = b.hw * L;
        battery.push_back(sample(g, [=](double x, double y) {
            return plateau(std::abs(x - cx) / hw, 0.5) * plateau(std::abs(y - cy) / hw, 0.5);
        }));
    }
    return battery;
}

DualNormReport dual_norm_surrogate(const Trajectory& traj, double beta, double s) {
    DualNormReport rep;
    if (traj.times.size() < 2) return rep;
    const Grid& g = traj.grid;
    const std::vector<ScalarField> battery = test_function_battery(g);

    // Norms the estimates pair against.
    const double q1 = (beta + 1.0) / beta;
    const double q2 = 2.0 * beta / (2.0 + (1.0 - s) * beta);
    const double r = interpolation_exponent(beta);
    const double qp = r / (r - beta);

    auto w1q = [](const ScalarField& f, double q) {
        const double a = lp_norm(f, q);
        const double b = sobolev_seminorm(f, q);
        return std::pow(std::pow(a, q) + std::pow(b, q), 1.0 / q);
    };

    std::vector<double> denom_u, denom_p;
    for (const ScalarField& phi : battery) {
        denom_u.push_back(std::max(w1q(phi, q1), w1q(phi, q2)));
        denom_p.push_back(std::max(lp_norm(phi, 2.0), lp_norm(phi, qp)));
    }

    for (size_t j = 1; j < traj.times.size(); ++j) {
        const double dt = traj.times[j] - traj.times[j - 1];
        double worst_u = 0.0, worst_p = 0.0;
        for (size_t b = 0; b < battery.size(); ++b) {
            double pu = 0.0, pp = 0.0;
            for (size_t i = 0; i < battery[b].values().size(); ++i) {
                pu += (traj.u[j][i] - traj.u[j - 1][i]) * battery[b][i];
                pp += (traj.p[j][i] - traj.p[j - 1][i]) * battery[b][i];
            }
            pu *= g.cell() / dt;
            pp *= g.cell() / dt;
            worst_u = std::max(worst_u, std::abs(pu) / denom_u[b]);
            worst_p = std::max(worst_p, std::abs(pp) / denom_p[b]);
        }
        rep.ratio_u_per_interval.push_back(worst_u);
        rep.ratio_p_per_interval.push_back(worst_p);
        rep.max_ratio_u = std::max(rep.max_ratio_u, worst_u);
        rep.max_ratio_p = std::max(rep.max_ratio_p, worst_p);
    }
    return rep;
}

}  // namespace fpm
