#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "fpm/energy.hpp"
#include "fpm/oracle_minimize.hpp"
#include "fpm/random_field.hpp"
#include "fpm/spectral.hpp"
#include "fpm/stepper.hpp"

using namespace fpm;

namespace {

ScalarField gaussian(const Grid& g, double amp, double width) {
    return sample(g, [=](double x, double y) {
        return amp * std::exp(-(x * x + y * y) / (2.0 * width * width));
    });
}

}  // namespace

TEST_CASE("scheme parameter validation") {
    SchemeParams par;
    CHECK_NOTHROW(par.validate());
    par.s = 0.4;  // s * beta = 0.8 < 1
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
    par = SchemeParams{};
    par.beta = 0.9;
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
    par = SchemeParams{};
    par.theta = 0.0;
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
    par = SchemeParams{};
    par.tau = -1.0;
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
}

TEST_CASE("pressure step: diagonal solve identities") {
    const Grid g = make_grid(48, 6.0);
    SchemeParams par;
    par.tau = 1e-2;

    // Zero source: every mode is divided by the symbol, the zero mode by 1,
    // so the mass of p is unchanged.
    const ScalarField p_prev = random_band_limited(g, 3, 5, 1.0);
    const ScalarField zero(g, 0.0);
    const ScalarField p1 = pressure_step(p_prev, zero, par);
    CHECK(integral(p1) == doctest::Approx(integral(p_prev)).epsilon(1e-13));

    // Constant source from zero pressure: p = tau * c^beta.
    const double c = 1.3;
    const ScalarField src(g, std::pow(c, par.beta));
    const ScalarField p2 = pressure_step(zero, src, par);
    CHECK(linf_norm(p2) == doctest::Approx(par.tau * std::pow(c, par.beta)).epsilon(1e-13));
    CHECK(field_min(p2) == doctest::Approx(par.tau * std::pow(c, par.beta)).epsilon(1e-13));

    // Manufactured data: plug-back residual at round-off relative to the
    // equation scale 1/tau.
    const ScalarField source = random_band_limited(g, 5, 6, 2.0);
    const ScalarField p3 = pressure_step(p_prev, source, par);
    const double res = pressure_residual(p3, p_prev, source, par);
    const double scale = l2h_norm(p3) / par.tau + l2h_norm(source);
    CHECK(res / scale < 1e-12);
}

TEST_CASE("pressure step: nonnegative data stays nonnegative") {
    const Grid g = make_grid(64, 10.0);
    SchemeParams par;
    for (int seed = 0; seed < 12; ++seed) {
        const ScalarField p_prev = random_nonnegative(g, seed, 8, 1.0);
        const ScalarField src = random_nonnegative(g, 500 + seed, 8, 2.0);
        const ScalarField p = pressure_step(p_prev, src, par);
        CHECK(field_min(p) >= -1e-12 * linf_norm(p));
    }
}

TEST_CASE("density step: constant fixed points and the sign of the eps term") {
    const Grid g = make_grid(32, 5.0);
    SchemeParams par;
    par.beta = 2.5;
    par.s = 0.75;
    par.tau = 0.05;
    par.rho1 = 0.02;
    par.epsilon = 0.0;

    const double c = 0.8;
    const ScalarField u_prev(g, c);
    const ScalarField p_flat(g, 1.7);  // grad p = 0
    const ScalarField z = u_prev;

    const DensityResult r0 = density_step(u_prev, p_flat, z, par);
    CHECK(r0.converged);
    CHECK(r0.newton_iters == 0);  // warm start is the exact solution
    CHECK(linf_norm(r0.w - ScalarField(g, std::pow(c, par.beta - 1.0))) < 1e-12);

    par.epsilon = 0.1;
    const DensityResult r1 = density_step(u_prev, p_flat, z, par);
    CHECK(r1.converged);
    const ScalarField u1 = spow(r1.w, 1.0 / (par.beta - 1.0));
    CHECK(integral(u1) < integral(u_prev));  // strict mass loss through the eps drain
}

TEST_CASE("density residual is the gradient of the objective") {
    const Grid g = make_grid(8, 4.0);
    SchemeParams par;
    par.beta = 2.2;
    par.tau = 0.1;
    par.rho1 = 0.05;
    par.epsilon = 0.04;
    par.delta_grad = 1e-6;

    ScalarField u_prev = random_nonnegative(g, 42, 2, 1.0);
    for (double& v : u_prev.values()) v += 0.3;
    ScalarField z = random_nonnegative(g, 43, 2, 0.7);
    for (double& v : z.values()) v += 0.2;
    const ScalarField p = random_band_limited(g, 44, 2, 0.5);
    ScalarField w = random_nonnegative(g, 45, 2, 0.9);
    for (double& v : w.values()) v += 0.4;

    const ScalarField F = density_residual(w, u_prev, p, z, par);
    const double h = 1e-6;
    for (int idx : {0, 9, 27, 45, 63}) {
        const double keep = w[idx];
        w[idx] = keep + h;
        const double jp = density_objective(w, u_prev, p, z, par);
        w[idx] = keep - h;
        const double jm = density_objective(w, u_prev, p, z, par);
        w[idx] = keep;
        const double fd = (jp - jm) / (2.0 * h);
        CHECK(fd == doctest::Approx(g.cell() * F[idx]).epsilon(2e-5));
    }
}

TEST_CASE("density step matches the brute-force minimizer on a tiny grid") {
    const Grid g = make_grid(8, 5.0);
    SchemeParams par;
    par.beta = 3.0;
    par.s = 0.75;
    par.tau = 0.1;
    par.rho1 = 0.05;
    par.rho2 = 0.0;
    par.epsilon = 0.05;
    par.delta_grad = 1e-6;
    par.inner_tol = 1e-12;
    par.inner_max = 200;

    ScalarField u_prev = random_nonnegative(g, 7, 2, 1.0);
    for (double& v : u_prev.values()) v += 0.2;
    ScalarField z = random_nonnegative(g, 8, 2, 0.8);
    for (double& v : z.values()) v += 0.1;
    const ScalarField p = random_band_limited(g, 9, 2, 0.4);

    const DensityResult solved = density_step(u_prev, p, z, par);
    REQUIRE(solved.converged);

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
    REQUIRE(oracle.converged);
    ScalarField w_oracle(g);
    w_oracle.values() = oracle.x;
    CHECK(l2h_norm(solved.w - w_oracle) < 1e-6);
}

TEST_CASE("coupled step: zero state is a one-iteration fixed point") {
    const Grid g = make_grid(32, 8.0);
    StepState st{ScalarField(g, 0.0), ScalarField(g, 0.0), 0.0};
    const StepResult r = coupled_step(st, SchemeParams{});
    REQUIRE(r.accepted);
    CHECK(r.diag.picard_iters == 1);
    CHECK(linf_norm(r.state.u) == 0.0);
    CHECK(linf_norm(r.state.p) == 0.0);
    CHECK(r.diag.energy_slack == doctest::Approx(0.0));
}

TEST_CASE("coupled step: decoupled pressure decay keeps u at zero") {
    const Grid g = make_grid(48, 10.0);
    StepState st{ScalarField(g, 0.0), gaussian(g, 1.0, 2.0), 0.0};
    SchemeParams par;
    par.tau = 5e-3;
    const double h_before = lyapunov_energy(st.u, st.p, par.beta).total;
    const StepResult r = coupled_step(st, par);
    REQUIRE(r.accepted);
    CHECK(linf_norm(r.state.u) == 0.0);
    CHECK(r.diag.energy_after < h_before);
    CHECK(r.diag.energy_slack >= 0.0);
    // Zero source: pressure mass is conserved by the diagonal solve.
    CHECK(r.diag.mass_p_after == doctest::Approx(r.diag.mass_p_before).epsilon(1e-12));
}

TEST_CASE("coupled step: decoupled slack equals the implicit-Euler surplus exactly") {
    // With u = 0 the only inequality in the per-step estimate is the
    // convexity gap of the pressure pairing, so the recorded slack must
    // equal (beta-1)/beta * (1/2tau) * int |grad(p_k - p_{k-1})|^2 to
    // round-off. This pins the exact pressure solve and every piece of the
    // energy bookkeeping at once.
    const Grid g = make_grid(48, 10.0);
    StepState st{ScalarField(g, 0.0), gaussian(g, 1.0, 2.0), 0.0};
    SchemeParams par;
    par.tau = 2e-3;
    const StepResult r = coupled_step(st, par);
    REQUIRE(r.accepted);
    const ScalarField diff = r.state.p - st.p;
    const double surplus = (par.beta - 1.0) / par.beta / (2.0 * par.tau) *
                           spectral_weighted_energy(diff, 1.0);
    CHECK(r.diag.energy_slack == doctest::Approx(surplus).epsilon(1e-10));
}

TEST_CASE("coupled step: generic step honors the estimate bookkeeping") {
    const Grid g = make_grid(48, 10.0);
    StepState st{gaussian(g, 1.0, 1.8), ScalarField(g, 0.0), 0.0};
    SchemeParams par;  // defaults: tau 1e-3, all regularizations 1e-3
    const StepResult r = coupled_step(st, par);
    REQUIRE(r.accepted);
    CHECK(r.diag.picard_iters >= 1);
    const double h0 = std::max(r.diag.energy_before, 1e-300);
    CHECK(r.diag.energy_slack >= -1e-10 * h0);

    // Density mass budget: the only mass sink is the eps drain, up to the
    // integral of the solver residual.
    const double residual_mass_bound =
        10.0 * par.tau * std::sqrt(g.area()) * std::max(par.inner_tol, r.diag.residual_u);
    const double budget = r.diag.mass_u_after - r.diag.mass_u_before +
                          par.epsilon * par.tau * r.diag.eps_leak_rate;
    CHECK(std::abs(budget) <= residual_mass_bound + 1e-13);

    // Pressure mass identity is exact by construction.
    const double pm = r.diag.mass_p_after - r.diag.mass_p_before -
                      par.tau * r.diag.source_mass;
    CHECK(std::abs(pm) <= 1e-12 * std::max(1.0, r.diag.mass_p_after));

    CHECK(r.diag.min_u >= -par.tol_neg * r.diag.max_u);
    CHECK(r.diag.min_p >= -par.tol_neg * std::max(r.diag.max_p, 1e-300));
}

TEST_CASE("coupled step: constant density is a fixed point and feeds the pressure mass") {
    // u = c with eps = 0: the pressure from a constant source is constant,
    // the drift vanishes, u stays c exactly, and one step raises the
    // pressure mass by exactly tau * c^beta * area.
    const Grid g = make_grid(32, 6.0);
    SchemeParams par;
    par.epsilon = 0.0;
    const double c = 0.7;
    StepState st{ScalarField(g, c), ScalarField(g, 0.0), 0.0};
    const StepResult r = coupled_step(st, par);
    REQUIRE(r.accepted);
    CHECK(linf_norm(r.state.u - ScalarField(g, c)) < 1e-12);
    const double expected = par.tau * std::pow(c, par.beta) * g.area();
    CHECK(r.diag.mass_p_after - r.diag.mass_p_before == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("coupled step works below beta = 2") {
    const Grid g = make_grid(32, 10.0);
    StepState st{gaussian(g, 0.8, 2.0), gaussian(g, 0.2, 3.0), 0.0};
    SchemeParams par;
    par.beta = 1.5;
    par.s = 0.8;  // s * beta = 1.2
    par.tau = 1e-3;
    const StepResult r = coupled_step(st, par);
    REQUIRE(r.accepted);
    CHECK(r.diag.energy_slack >= -1e-9 * std::max(r.diag.energy_before, 1.0));
}

TEST_CASE("evolve: zero data gives an identically trivial series") {
    const Grid g = make_grid(32, 8.0);
    StepState st{ScalarField(g, 0.0), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    EvolveOptions opt;
    opt.horizon = 10 * par.tau;
    opt.snapshot_every = 5;
    const EvolveResult run = evolve(st, par, opt);
    REQUIRE(run.completed);
    CHECK(run.series.size() == 11);  // initial row + 10 steps
    for (const StepDiagnostics& d : run.series) {
        CHECK(d.mass_u_after == 0.0);
        CHECK(d.mass_p_after == 0.0);
        CHECK(d.energy_after == 0.0);
    }
}

TEST_CASE("evolve: short generic run, energy monotone and mass conserved at eps = 0") {
    const Grid g = make_grid(48, 10.0);
    StepState st{gaussian(g, 1.0, 1.8), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    par.epsilon = 0.0;
    EvolveOptions opt;
    opt.horizon = 10 * par.tau;
    opt.snapshot_every = 5;
    const EvolveResult run = evolve(st, par, opt);
    REQUIRE(run.completed);
    REQUIRE(run.series.size() == 11);
    const double h0 = run.series.front().energy_after;
    const double m0 = run.series.front().mass_u_after;
    for (size_t k = 1; k < run.series.size(); ++k) {
        CHECK(run.series[k].energy_after <=
              run.series[k - 1].energy_after + 1e-8 * std::max(h0, 1.0));
        CHECK(std::abs(run.series[k].mass_u_after - m0) <= 1e-10 * std::abs(m0));
    }
    // Snapshots: initial + steps 5 and 10.
    CHECK(run.trajectory.times.size() == 3);
}

TEST_CASE("evolve: terminal summary matches the energy budget") {
    const Grid g = make_grid(32, 10.0);
    StepState st{gaussian(g, 1.0, 1.8), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    EvolveOptions opt;
    opt.horizon = 8 * par.tau;
    const EvolveResult run = evolve(st, par, opt);
    REQUIRE(run.completed);
    // By construction of the per-step slack: drop = dissipation + gap.
    CHECK(run.energy_drop ==
          doctest::Approx(run.cumulative_dissipation + run.budget_gap).epsilon(1e-10));
    CHECK(run.budget_gap >= -1e-8 * run.h0);
    CHECK(run.cumulative_dissipation > 0.0);
}

TEST_CASE("evolve: an unconvergeable Picard cap aborts with a partial marker") {
    const Grid g = make_grid(32, 10.0);
    StepState st{gaussian(g, 1.0, 2.0), ScalarField(g, 0.0), 0.0};
    SchemeParams par;
    par.picard_max = 1;  // cannot converge in one damped iteration
    EvolveOptions opt;
    opt.horizon = 5 * par.tau;
    opt.retry_halve_tau = true;
    opt.tau_floor_factor = 0.25;  // two halvings, then give up
    opt.out_dir = "stepper_abort_out";
    const EvolveResult run = evolve(st, par, opt);
    CHECK_FALSE(run.completed);
    CHECK(run.abort_reason.find("rejected") != std::string::npos);
    CHECK(std::filesystem::exists("stepper_abort_out/PARTIAL"));
    std::filesystem::remove_all("stepper_abort_out");
}
