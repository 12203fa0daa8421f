// Command-line front end: run / ladder / validate / plotdata / selftest.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpm/config.hpp"
#include "fpm/diagnostics.hpp"
#include "fpm/energy.hpp"
#include "fpm/io.hpp"
#include "fpm/ladder.hpp"
#include "fpm/selftest.hpp"
#include "fpm/stepper.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fpm::RunConfig load_config(const std::string& path) {
    if (path.empty()) return fpm::RunConfig{};  // documented defaults
    return fpm::parse_config_file(path);
}

void echo_config(const fpm::RunConfig& cfg, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream os(fs::path(dir) / "config.txt");
    os << fpm::serialize_config(cfg);
}

json check_to_json(const fpm::CheckReport& rep) {
    return json{{"pass", rep.pass}, {"worst", rep.worst}, {"detail", rep.detail}};
}

// Shared by `run` (fresh series) and `validate` (series re-read from disk).
int run_checks_and_report(const fpm::RunConfig& cfg, const fpm::BudgetSeries& series,
                          const fpm::Trajectory* traj, bool completed,
                          const std::string& abort_reason, const std::string& report_path) {
    std::map<std::string, fpm::CheckReport> checks;
    for (const fpm::CheckReport& rep :
         {fpm::check_energy_budget(series), fpm::check_pressure_mass(series),
          fpm::check_nonnegativity(series), fpm::check_density_mass(series)})
        checks[rep.name] = rep;

    json report;
    report["completed"] = completed;
    if (!abort_reason.empty()) report["abort_reason"] = abort_reason;
    // The existence theory assumes beta > 1 only, but parts of the limit
    // argument invoke beta >= 2; runs below 2 are flagged, not refused.
    report["beta_below_two"] = cfg.scheme.beta < 2.0;

    if (traj != nullptr && !traj->times.empty()) {
        const fpm::TheoremNorms norms =
            fpm::check_theorem_norms(*traj, cfg.scheme.beta, cfg.scheme.s);
        fpm::CheckReport nrep;
        nrep.name = "check_theorem_norms";
        nrep.pass = norms.all_finite;
        nrep.worst = norms.lbeta1_spacetime_u;
        nrep.detail = "sup L1 " + fpm::format_double(norms.sup_l1_u) + ", sup Lbeta " +
                      fpm::format_double(norms.sup_lbeta_u) + ", L^{beta+1} " +
                      fpm::format_double(norms.lbeta1_spacetime_u) + ", sup H1(p) " +
                      fpm::format_double(norms.sup_h1_p) + ", L2 H^{s+1}(p) " +
                      fpm::format_double(norms.l2_hs1_p);
        checks[nrep.name] = nrep;
    }

    bool all_pass = completed;
    json jchecks;
    for (const auto& [name, rep] : checks) {
        jchecks[name] = check_to_json(rep);
        all_pass = all_pass && rep.pass;
        std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << name << ": " << rep.detail << "\n";
    }
    report["checks"] = jchecks;

    std::ofstream os(report_path);
    os << report.dump(2) << "\n";
    if (!completed) {
        std::cerr << "run aborted: " << abort_reason << "\n";
        return 3;
    }
    return all_pass ? 0 : 1;
}

int cmd_run(const std::string& config_path, std::string out_dir, bool retry_halve_tau) {
    fpm::RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (retry_halve_tau) cfg.retry_halve_tau = true;
    echo_config(cfg, cfg.out_dir);

    const fpm::StepState initial = fpm::build_initial_state(cfg);
    fpm::EvolveOptions opt;
    opt.horizon = cfg.horizon;
    opt.snapshot_every = cfg.snapshot_every;
    opt.retry_halve_tau = cfg.retry_halve_tau;
    opt.out_dir = cfg.out_dir;
    const fpm::EvolveResult run = fpm::evolve(initial, cfg.scheme, opt);

    std::cout << "terminal summary: energy drop " << fpm::format_double(run.energy_drop)
              << ", time-aggregated dissipation "
              << fpm::format_double(run.cumulative_dissipation) << ", budget gap "
              << fpm::format_double(run.budget_gap) << "\n";

    fpm::BudgetSeries series{run.params, initial.u.grid().area(), run.series};
    return run_checks_and_report(cfg, series, &run.trajectory, run.completed, run.abort_reason,
                                 (fs::path(cfg.out_dir) / "report.json").string());
}

int cmd_ladder(const std::string& config_path, std::string out_dir, int jobs) {
    fpm::RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    echo_config(cfg, cfg.out_dir);

    fpm::LadderSpec spec;
    spec.initial = fpm::build_initial_state(cfg);
    spec.base = cfg.scheme;
    spec.parameter = fpm::sweep_parameter_from_string(cfg.ladder_parameter);
    spec.ratio = cfg.ladder_ratio;
    spec.count = cfg.ladder_count;
    spec.interior_margin = cfg.ladder_margin;
    spec.horizon = cfg.horizon;
    spec.snapshot_every = cfg.snapshot_every;
    switch (spec.parameter) {
        case fpm::SweepParameter::epsilon: spec.start = cfg.scheme.epsilon; break;
        case fpm::SweepParameter::tau: spec.start = cfg.scheme.tau; break;
        case fpm::SweepParameter::rho2: spec.start = cfg.scheme.rho2; break;
        case fpm::SweepParameter::rho1: spec.start = cfg.scheme.rho1; break;
        case fpm::SweepParameter::delta_grad: spec.start = cfg.scheme.delta_grad; break;
    }

    const fpm::LadderReport rep = fpm::run_ladder(spec, cfg.jobs);
    fpm::write_ladder_outputs(cfg.out_dir, rep);
    std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << "ladder " << fpm::to_string(rep.parameter)
              << ": " << rep.detail << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_validate(const std::string& dir) {
    const fpm::RunConfig cfg = fpm::parse_config_file((fs::path(dir) / "config.txt").string());
    const std::vector<fpm::StepDiagnostics> rows =
        fpm::read_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string());
    const fpm::Grid grid = fpm::make_grid(cfg.grid_n, cfg.grid_l);
    fpm::BudgetSeries series{cfg.scheme, grid.area(), rows};

    // Snapshot cross-check: recompute masses and energy at snapshot times and
    // compare against the recorded rows.
    fpm::Trajectory traj = fpm::read_trajectory(dir);
    bool snaps_ok = true;
    std::string snap_detail = "recomputed masses/energy at " +
                              std::to_string(traj.times.size()) + " snapshots match the CSV";
    for (size_t j = 0; j < traj.times.size() && snaps_ok; ++j) {
        const fpm::StepDiagnostics* row = nullptr;
        for (const fpm::StepDiagnostics& d : rows)
            if (std::abs(d.time - traj.times[j]) <= 1e-12 * std::max(1.0, std::abs(d.time)))
                row = &d;
        if (row == nullptr) continue;
        const double mu = fpm::integral(traj.u[j]);
        const double mp = fpm::integral(traj.p[j]);
        const fpm::EnergyReport er = fpm::lyapunov_energy(traj.u[j], traj.p[j], cfg.scheme.beta);
        const double tol = 1e-9;
        if (std::abs(mu - row->mass_u_after) > tol * std::max(1.0, std::abs(mu)) ||
            std::abs(mp - row->mass_p_after) > tol * std::max(1.0, std::abs(mp)) ||
            std::abs(er.total - row->energy_after) > tol * std::max(1.0, er.total)) {
            snaps_ok = false;
            snap_detail = "snapshot at t = " + fpm::format_double(traj.times[j]) +
                          " disagrees with the CSV row";
        }
    }

    const bool partial = fs::exists(fs::path(dir) / "PARTIAL");
    std::string abort_reason;
    if (partial) {
        std::ifstream is(fs::path(dir) / "PARTIAL");
        std::getline(is, abort_reason);
    }

    std::cout << (snaps_ok ? "[PASS] " : "[FAIL] ") << "check_snapshot_consistency: "
              << snap_detail << "\n";
    const int rc =
        run_checks_and_report(cfg, series, &traj, !partial, abort_reason,
                              (fs::path(dir) / "validate_report.json").string());
    if (rc == 0 && !snaps_ok) return 1;
    return rc;
}

int cmd_plotdata(const std::string& dir, const std::string& what) {
    if (what == "energy" || what == "mass" || what == "slack") {
        const auto rows = fpm::read_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string());
        if (what == "energy") {
            std::cout << "time,energy,dissipation\n";
            for (const auto& d : rows)
                std::cout << fpm::format_double(d.time) << ','
                          << fpm::format_double(d.energy_after) << ','
                          << fpm::format_double(d.dissipation_s) << "\n";
        } else if (what == "mass") {
            std::cout << "time,mass_u,mass_p\n";
            for (const auto& d : rows)
                std::cout << fpm::format_double(d.time) << ','
                          << fpm::format_double(d.mass_u_after) << ','
                          << fpm::format_double(d.mass_p_after) << "\n";
        } else {
            std::cout << "time,energy_slack\n";
            for (const auto& d : rows)
                std::cout << fpm::format_double(d.time) << ','
                          << fpm::format_double(d.energy_slack) << "\n";
        }
        return 0;
    }
    if (what == "radial") {
        const fpm::Trajectory traj = fpm::read_trajectory(dir);
        if (traj.times.empty()) {
            std::cerr << "plotdata: no snapshots in " << dir << "\n";
            return 1;
        }
        const fpm::ScalarField& u = traj.u.back();
        const fpm::ScalarField& p = traj.p.back();
        const fpm::Grid& g = traj.grid;
        const int bins = g.n / 2;
        std::vector<double> su(bins, 0.0), sp(bins, 0.0);
        std::vector<int> cnt(bins, 0);
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy) {
                const double r = std::hypot(g.coord(ix), g.coord(iy));
                const int b = static_cast<int>(r / g.spacing);
                if (b >= bins) continue;
                su[b] += u(ix, iy);
                sp[b] += p(ix, iy);
                ++cnt[b];
            }
        std::cout << "r,u_mean,p_mean\n";
        for (int b = 0; b < bins; ++b)
            if (cnt[b] > 0)
                std::cout << fpm::format_double((b + 0.5) * g.spacing) << ','
                          << fpm::format_double(su[b] / cnt[b]) << ','
                          << fpm::format_double(sp[b] / cnt[b]) << "\n";
        return 0;
    }
    std::cerr << "plotdata: unknown series '" << what << "' (energy|mass|slack|radial)\n";
    return 2;
}

int cmd_selftest(bool quick) {
    const auto results = fpm::run_acceptance(quick);
    bool all = true;
    for (const fpm::CriterionResult& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.index << ". " << r.name << ": "
                  << r.stat << "\n";
        all = all && r.pass;
    }
    std::cout << (all ? "selftest: all criteria passed\n" : "selftest: FAILURES present\n");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpm: nonlocal porous-medium solver and verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir, dir, what;
    bool retry = false, quick = false;
    int jobs = 0;

    CLI::App* run = app.add_subcommand("run", "run a simulation and its checks");
    run->add_option("--config", config_path, "configuration file");
    run->add_option("--out", out_dir, "output directory (overrides run.out)");
    run->add_flag("--retry-halve-tau", retry, "halve tau and retry on solver failure");

    CLI::App* ladder = app.add_subcommand("ladder", "run a regularization-parameter sweep");
    ladder->add_option("--config", config_path, "configuration file");
    ladder->add_option("--out", out_dir, "output directory (overrides run.out)");
    ladder->add_option("--jobs", jobs, "concurrent rungs");

    CLI::App* validate = app.add_subcommand("validate", "rerun all checks from emitted files");
    validate->add_option("dir", dir, "output directory of a previous run")->required();

    CLI::App* plotdata = app.add_subcommand("plotdata", "emit plottable CSV series");
    plotdata->add_option("dir", dir, "output directory of a previous run")->required();
    plotdata->add_option("what", what, "energy|mass|slack|radial")->required();

    CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance suite");
    selftest->add_flag("--quick", quick, "reduced sizes (smoke run)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, retry);
        if (ladder->parsed()) return cmd_ladder(config_path, out_dir, jobs);
        if (validate->parsed()) return cmd_validate(dir);
        if (plotdata->parsed()) return cmd_plotdata(dir, what);
        if (selftest->parsed()) return cmd_selftest(quick);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
