#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "fpm/config.hpp"
#include "fpm/diagnostics.hpp"
#include "fpm/io.hpp"
#include "fpm/random_field.hpp"

using namespace fpm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("snapshot files round-trip bit-exactly") {
    TempDir tmp("fpm_snap_test");
    const Grid g = make_grid(32, 7.5);
    ScalarField f = random_band_limited(g, 99, 6, 3.0);
    f(3, 4) = 1e-300;  // subnormal-ish corner
    f(5, 6) = -0.0;
    const double t = 0.12345678901234567;
    const std::string path = (tmp.path / "field.fpm").string();
    write_snapshot(path, f, t, "u");
    const Snapshot snap = read_snapshot(path);
    CHECK(snap.name == "u");
    CHECK(snap.time == t);
    CHECK(snap.field.grid().n == g.n);
    CHECK(snap.field.grid().box_half == g.box_half);
    for (size_t i = 0; i < f.values().size(); ++i) CHECK(snap.field[i] == f[i]);

    CHECK_THROWS(read_snapshot((tmp.path / "missing.fpm").string()));
    std::ofstream bad(tmp.path / "bad.fpm");
    bad << "NOPE 32\n";
    bad.close();
    CHECK_THROWS(read_snapshot((tmp.path / "bad.fpm").string()));
}

TEST_CASE("diagnostics CSV round-trips bit-exactly and chains the before-columns") {
    TempDir tmp("fpm_csv_test");
    std::vector<StepDiagnostics> series(3);
    for (int k = 0; k < 3; ++k) {
        StepDiagnostics& d = series[k];
        d.step = k;
        d.time = k * 1e-3;
        d.tau_used = 1e-3;
        d.mass_u_after = 25.0 + 1e-13 * k;
        d.mass_p_after = 0.1 * k + 1.0 / 3.0;
        d.energy_after = 12.0 - 0.01 * k;
        d.dissipation_s = 1e-5 * k;
        d.energy_slack = 7.7e-4;
        d.min_u = -1e-12;
        d.min_p = 0.0;
        d.max_u = 1.0;
        d.max_p = 0.25;
        d.picard_iters = 14;
        d.inner_iters = 11;
        d.residual_u = 3.3e-11;
        d.residual_p = 1e-13;
        d.boundary_indicator = 1e-30;
        d.source_mass = 13.0 / 7.0;
        d.diss_w = 0.5;
        d.diss_eps = 0.25;
        d.diss_lap = 0.125;
        d.eps_leak_rate = 2.5;
    }
    const std::string path = (tmp.path / "d.csv").string();
    write_diagnostics_csv(path, series);
    const auto back = read_diagnostics_csv(path);
    REQUIRE(back.size() == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(back[k].mass_u_after == series[k].mass_u_after);
        CHECK(back[k].energy_after == series[k].energy_after);
        CHECK(back[k].source_mass == series[k].source_mass);
        CHECK(back[k].eps_leak_rate == series[k].eps_leak_rate);
    }
    CHECK(back[1].mass_u_before == back[0].mass_u_after);
    CHECK(back[2].energy_before == back[1].energy_after);
}

TEST_CASE("config parsing: defaults, echo round-trip, named errors") {
    const RunConfig def = parse_config_text("");
    CHECK(def.grid_n == 128);
    CHECK(def.grid_l == 20.0);
    CHECK(def.scheme.beta == 2.0);
    CHECK(def.scheme.s == 0.75);
    CHECK(def.scheme.tau == 1e-3);
    CHECK(def.scheme.epsilon == 1e-3);
    CHECK(def.scheme.theta == 0.5);
    CHECK(def.scheme.picard_tol == 1e-9);
    CHECK(def.scheme.inner_tol == 1e-10);

    const std::string text =
        "# comment\n"
        "grid.N = 64\n"
        "scheme.beta = 2.5\n"
        "init.u = gaussian\n"
        "init.u.width = 1.25\n"
        "init.p = zero\n"
        "run.T = 0.05\n"
        "ladder.parameter = epsilon\n";
    const RunConfig cfg = parse_config_text(text);
    CHECK(cfg.grid_n == 64);
    CHECK(cfg.scheme.beta == 2.5);
    CHECK(cfg.init_u.width == 1.25);
    CHECK(cfg.ladder_parameter == "epsilon");

    // Echo parses back to the same configuration.
    const RunConfig echo = parse_config_text(serialize_config(cfg));
    CHECK(echo.grid_n == cfg.grid_n);
    CHECK(echo.scheme.beta == cfg.scheme.beta);
    CHECK(echo.init_u.width == cfg.init_u.width);
    CHECK(echo.ladder_parameter == cfg.ladder_parameter);

    // Errors name the offending key.
    try {
        parse_config_text("scheme.beta = fast\n");
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("scheme.beta") != std::string::npos);
    }
    try {
        parse_config_text("grid.M = 12\n");
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("grid.M") != std::string::npos);
    }
    // Invariants are enforced before any compute starts.
    CHECK_THROWS_AS(parse_config_text("scheme.s = 0.4\n"), std::invalid_argument);
}

TEST_CASE("initial-data presets") {
    const Grid g = make_grid(32, 10.0);
    InitSpec zero;
    CHECK(linf_norm(build_initial_field(zero, g)) == 0.0);

    InitSpec gauss;
    gauss.kind = InitSpec::Kind::gaussian;
    gauss.amplitude = 2.0;
    gauss.width = 1.5;
    const ScalarField f = build_initial_field(gauss, g);
    CHECK(field_max(f) == doctest::Approx(2.0));
    CHECK(f(16, 16) == doctest::Approx(2.0));

    TempDir tmp("fpm_init_test");
    const std::string path = (tmp.path / "u0.fpm").string();
    write_snapshot(path, f, 0.0, "u");
    InitSpec from_file;
    from_file.kind = InitSpec::Kind::file;
    from_file.path = path;
    const ScalarField f2 = build_initial_field(from_file, g);
    for (size_t i = 0; i < f.values().size(); ++i) CHECK(f2[i] == f[i]);

    const Grid other = make_grid(64, 10.0);
    CHECK_THROWS(build_initial_field(from_file, other));
}

TEST_CASE("run outputs: emitted files recheck cleanly, tampering is caught") {
    TempDir tmp("fpm_runout_test");
    RunConfig cfg = parse_config_text(
        "grid.N = 32\n"
        "grid.L = 10\n"
        "run.T = 0.008\n"
        "run.snapshot_every = 2\n");
    cfg.out_dir = (tmp.path / "out").string();

    const StepState initial = build_initial_state(cfg);
    EvolveOptions opt;
    opt.horizon = cfg.horizon;
    opt.snapshot_every = cfg.snapshot_every;
    opt.out_dir = cfg.out_dir;
    const EvolveResult run = evolve(initial, cfg.scheme, opt);
    REQUIRE(run.completed);

    CHECK(fs::exists(fs::path(cfg.out_dir) / "diagnostics.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "snapshots" / "index.csv"));
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "PARTIAL"));

    // Re-read and recheck from the files alone.
    const auto rows = read_diagnostics_csv((fs::path(cfg.out_dir) / "diagnostics.csv").string());
    BudgetSeries series{cfg.scheme, make_grid(cfg.grid_n, cfg.grid_l).area(), rows};
    CHECK(check_energy_budget(series).pass);
    CHECK(check_pressure_mass(series).pass);
    CHECK(check_nonnegativity(series).pass);

    const Trajectory traj = read_trajectory(cfg.out_dir);
    CHECK(traj.times.size() == run.trajectory.times.size());
    for (size_t j = 0; j < traj.times.size(); ++j)
        for (size_t i = 0; i < traj.u[j].values().size(); ++i)
            CHECK(traj.u[j][i] == run.trajectory.u[j][i]);

    // The emitted energy series is nonincreasing (what plotdata emits).
    for (size_t k = 1; k < rows.size(); ++k)
        CHECK(rows[k].energy_after <= rows[k - 1].energy_after + 1e-10);

    // Perturb the energy column upward: the budget check must fail.
    auto tampered = rows;
    tampered[3].energy_after *= 1.02;
    BudgetSeries bad{cfg.scheme, series.area, tampered};
    const CheckReport rep = check_energy_budget(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.name == "check_energy_budget");
}

#ifdef FPM_CLI_PATH
TEST_CASE("cli validate: clean outputs pass, an upward energy tamper fails by name") {
    TempDir tmp("fpm_cli_tamper_test");
    const std::string out = (tmp.path / "out").string();
    const std::string cfg_path = (tmp.path / "run.cfg").string();
    {
        std::ofstream cf(cfg_path);
        cf << "grid.N = 32\ngrid.L = 10\nrun.T = 0.006\nrun.snapshot_every = 2\n";
    }
    auto shellquote = [](const std::string& s) { return "'" + s + "'"; };
    const std::string base = std::string(FPM_CLI_PATH);
    REQUIRE(std::system((base + " run --config " + shellquote(cfg_path) + " --out " +
                         shellquote(out) + " > /dev/null")
                            .c_str()) == 0);
    REQUIRE(std::system((base + " validate " + shellquote(out) + " > /dev/null").c_str()) == 0);

    // Tamper: bump one energy value upward and re-validate through the CLI.
    const std::string csv_path = out + "/diagnostics.csv";
    auto rows = read_diagnostics_csv(csv_path);
    rows[2].energy_after *= 1.05;
    write_diagnostics_csv(csv_path, rows);
    const std::string log = (tmp.path / "validate.log").string();
    const int rc =
        std::system((base + " validate " + shellquote(out) + " > " + shellquote(log)).c_str());
    CHECK(rc != 0);
    std::ifstream lf(log);
    std::string contents((std::istreambuf_iterator<char>(lf)), std::istreambuf_iterator<char>());
    CHECK(contents.find("[FAIL] check_energy_budget") != std::string::npos);
}
#endif
