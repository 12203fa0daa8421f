#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fpm/diagnostics.hpp"
#include "fpm/energy.hpp"
#include "fpm/random_field.hpp"
#include "fpm/spectral.hpp"

using namespace fpm;

namespace {

ScalarField gaussian(const Grid& g, double amp, double width) {
    return sample(g, [=](double x, double y) {
        return amp * std::exp(-(x * x + y * y) / (2.0 * width * width));
    });
}

EvolveResult small_run(int n, double eps, int steps) {
    const Grid g = make_grid(n, 10.0);
    StepState st{gaussian(g, 1.0, 1.8), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    par.epsilon = eps;
    EvolveOptions opt;
    opt.horizon = steps * par.tau;
    opt.snapshot_every = std::max(1, steps / 4);
    return evolve(st, par, opt);
}

BudgetSeries to_series(const EvolveResult& run) {
    return BudgetSeries{run.params, run.trajectory.grid.area(), run.series};
}

}  // namespace

TEST_CASE("energy budget: zero trajectory has exactly zero slack") {
    const Grid g = make_grid(16, 5.0);
    StepState st{ScalarField(g, 0.0), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    EvolveOptions opt;
    opt.horizon = 5 * par.tau;
    const EvolveResult run = evolve(st, par, opt);
    REQUIRE(run.completed);
    const CheckReport rep = check_energy_budget(to_series(run));
    CHECK(rep.pass);
    CHECK(rep.worst == 0.0);
}

TEST_CASE("energy budget: decoupled pressure decay passes with nonnegative slack") {
    // Pure implicit-Euler fractional heat flow: the inequality holds with a
    // surplus of order tau (the scheme dissipates slightly more than the
    // continuous identity), so every slack is >= 0 and O(tau)-small.
    const Grid g = make_grid(48, 10.0);
    StepState st{ScalarField(g, 0.0), gaussian(g, 1.0, 2.0), 0.0};
    SchemeParams par;
    EvolveOptions opt;
    opt.horizon = 10 * par.tau;
    const EvolveResult run = evolve(st, par, opt);
    REQUIRE(run.completed);
    const BudgetSeries series = to_series(run);
    const CheckReport rep = check_energy_budget(series);
    CHECK(rep.pass);
    for (size_t k = 1; k < series.rows.size(); ++k) {
        CHECK(series.rows[k].energy_slack >= 0.0);
        CHECK(series.rows[k].energy_slack <=
              10.0 * par.tau * series.h0() / par.tau);  // coarse O(1) sanity cap
    }
}

TEST_CASE("energy budget: generic run passes and equals the slack accumulation") {
    const EvolveResult run = small_run(48, 1e-3, 12);
    REQUIRE(run.completed);
    const BudgetSeries series = to_series(run);
    const CheckReport rep = check_energy_budget(series);
    CHECK(rep.pass);

    // Global budget equals the sum of per-step slacks by construction.
    const double beta = series.params.beta;
    double acc = 0.0;
    for (size_t k = 1; k < series.rows.size(); ++k)
        acc += series.rows[k].tau_used * series.rows[k].energy_slack;
    const double e0 = (beta - 1.0) / beta * series.rows.front().energy_after;
    const double eT = (beta - 1.0) / beta * series.rows.back().energy_after;
    double diss = 0.0;
    for (size_t k = 1; k < series.rows.size(); ++k) {
        const StepDiagnostics& d = series.rows[k];
        diss += d.tau_used *
                (series.params.rho1 * d.diss_w + series.params.epsilon * d.diss_eps +
                 (beta - 1.0) / beta * (d.dissipation_s + series.params.rho2 * d.diss_lap));
    }
    CHECK(acc == doctest::Approx(e0 - eT - diss).epsilon(1e-9));
}

TEST_CASE("energy budget: a tampered energy column is caught") {
    const EvolveResult run = small_run(32, 1e-3, 8);
    REQUIRE(run.completed);
    BudgetSeries series = to_series(run);
    series.rows[4].energy_after *= 1.01;  // perturb upward
    const CheckReport rep = check_energy_budget(series);
    CHECK_FALSE(rep.pass);
    CHECK(rep.name == "check_energy_budget");
}

TEST_CASE("pressure mass identity: decoupled flow conserves, generic run passes, tamper fails") {
    {
        const Grid g = make_grid(32, 10.0);
        StepState st{ScalarField(g, 0.0), gaussian(g, 1.0, 2.0), 0.0};
        SchemeParams par;
        EvolveOptions opt;
        opt.horizon = 6 * par.tau;
        const EvolveResult run = evolve(st, par, opt);
        REQUIRE(run.completed);
        const BudgetSeries series = to_series(run);
        CHECK(check_pressure_mass(series).pass);
        const double m0 = series.rows.front().mass_p_after;
        for (const StepDiagnostics& d : series.rows)
            CHECK(d.mass_p_after == doctest::Approx(m0).epsilon(1e-12));
    }
    {
        const EvolveResult run = small_run(32, 1e-3, 8);
        REQUIRE(run.completed);
        BudgetSeries series = to_series(run);
        CHECK(check_pressure_mass(series).pass);
        series.rows[3].mass_p_after += 1e-6;
        CHECK_FALSE(check_pressure_mass(series).pass);
    }
}

TEST_CASE("nonnegativity and density mass checks on recorded series") {
    const EvolveResult run0 = small_run(32, 0.0, 8);
    REQUIRE(run0.completed);
    CHECK(check_nonnegativity(to_series(run0)).pass);
    CHECK(check_density_mass(to_series(run0)).pass);

    const EvolveResult run1 = small_run(32, 1e-2, 8);
    REQUIRE(run1.completed);
    CHECK(check_density_mass(to_series(run1)).pass);

    BudgetSeries bad = to_series(run0);
    bad.rows[2].min_u = -1.0;
    CHECK_FALSE(check_nonnegativity(bad).pass);
}

TEST_CASE("theorem norms: zero data, homogeneity at t = 0, generic finiteness") {
    const Grid g = make_grid(32, 10.0);
    Trajectory zero;
    zero.grid = g;
    zero.times = {0.0};
    zero.u.push_back(ScalarField(g, 0.0));
    zero.p.push_back(ScalarField(g, 0.0));
    const TheoremNorms tz = check_theorem_norms(zero, 2.0, 0.75);
    CHECK(tz.all_finite);
    CHECK(tz.sup_l1_u == 0.0);
    CHECK(tz.sup_h1_p == 0.0);

    Trajectory one = zero, two = zero;
    one.u[0] = gaussian(g, 1.0, 2.0);
    one.p[0] = gaussian(g, 0.5, 3.0);
    two.u[0] = gaussian(g, 2.0, 2.0);
    two.p[0] = gaussian(g, 1.0, 3.0);
    const TheoremNorms n1 = check_theorem_norms(one, 2.0, 0.75);
    const TheoremNorms n2 = check_theorem_norms(two, 2.0, 0.75);
    CHECK(n2.sup_l1_u == doctest::Approx(2.0 * n1.sup_l1_u).epsilon(1e-12));
    CHECK(n2.sup_lbeta_u == doctest::Approx(2.0 * n1.sup_lbeta_u).epsilon(1e-12));
    CHECK(n2.sup_h1_p == doctest::Approx(2.0 * n1.sup_h1_p).epsilon(1e-12));

    const EvolveResult run = small_run(32, 1e-3, 8);
    REQUIRE(run.completed);
    const TheoremNorms tn = check_theorem_norms(run.trajectory, run.params.beta, run.params.s);
    CHECK(tn.all_finite);
    CHECK(tn.lbeta1_spacetime_u > 0.0);
    CHECK(tn.l2_hs1_p > 0.0);
}

TEST_CASE("divcurl monitor: zero density and steady pressure") {
    const Grid g = make_grid(32, 10.0);
    Trajectory traj;
    traj.grid = g;
    traj.times = {0.0, 0.1};
    traj.u = {ScalarField(g, 0.0), ScalarField(g, 0.0)};
    traj.p = {gaussian(g, 1.0, 2.0), gaussian(g, 1.0, 2.0)};
    const auto zero_series = divcurl_monitor(traj);
    REQUIRE(zero_series.size() == 1);
    CHECK(zero_series[0] == 0.0);

    // Steady p with nontrivial u: the product reduces to -int u |grad p|^2.
    traj.u = {gaussian(g, 1.0, 2.0), gaussian(g, 1.0, 2.0)};
    const auto steady = divcurl_monitor(traj);
    auto [px, py] = gradient(traj.p[1]);
    double expect = 0.0;
    for (size_t i = 0; i < px.values().size(); ++i)
        expect -= traj.u[1][i] * (px[i] * px[i] + py[i] * py[i]);
    expect *= g.cell();
    CHECK(steady[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("test-function battery: plateau, range, compact support") {
    const Grid g = make_grid(64, 20.0);
    const auto battery = test_function_battery(g);
    REQUIRE(battery.size() == 8);
    for (const ScalarField& phi : battery) {
        CHECK(field_min(phi) >= 0.0);
        CHECK(field_max(phi) <= 1.0);
        // Compact support: zero on the boundary ring.
        for (int i = 0; i < g.n; ++i) {
            CHECK(phi(i, 0) == 0.0);
            CHECK(phi(0, i) == 0.0);
        }
    }
    // Entry 0 is identically one on the interior box [-L/4, L/4]^2.
    const ScalarField& phi0 = battery[0];
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            if (std::max(std::abs(g.coord(ix)), std::abs(g.coord(iy))) <= 0.25 * g.box_half)
                CHECK(phi0(ix, iy) == 1.0);
}

TEST_CASE("dual norm surrogate: zero trajectory and mass-flux recovery") {
    const Grid g = make_grid(32, 10.0);
    Trajectory traj;
    traj.grid = g;
    traj.times = {0.0, 0.05};
    traj.u = {ScalarField(g, 0.0), ScalarField(g, 0.0)};
    traj.p = {ScalarField(g, 0.0), ScalarField(g, 0.0)};
    const DualNormReport zero = dual_norm_surrogate(traj, 2.0, 0.75);
    CHECK(zero.max_ratio_u == 0.0);
    CHECK(zero.max_ratio_p == 0.0);

    // The pairing with the plateau function is the discrete local mass flux.
    traj.u[1] = gaussian(g, 0.3, 0.6);  // supported well inside the plateau
    const auto battery = test_function_battery(g);
    double pairing = 0.0;
    for (size_t i = 0; i < battery[0].values().size(); ++i)
        pairing += (traj.u[1][i] - traj.u[0][i]) * battery[0][i];
    pairing *= g.cell() / 0.05;
    CHECK(pairing == doctest::Approx(integral(traj.u[1]) / 0.05).epsilon(1e-6));
    const DualNormReport rep = dual_norm_surrogate(traj, 2.0, 0.75);
    CHECK(rep.max_ratio_u > 0.0);
}
