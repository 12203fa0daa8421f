#include "fpm/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fpm {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void put_le64(std::ostream& os, double v) {
    const uint64_t bits = std::bit_cast<uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_le64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& f, double time,
                    const std::string& name) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    char header[256];
    std::snprintf(header, sizeof header, "FPM1 %d %a %a %s\n", f.n(), f.grid().box_half, time,
                  name.c_str());
    os << header;
    for (double v : f.values()) put_le64(os, v);
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    std::string header;
    std::getline(is, header);
    std::istringstream hs(header);
    std::string magic, l_str, t_str, name;
    int n = 0;
    hs >> magic >> n >> l_str >> t_str >> name;
    if (magic != "FPM1" || n < 4)
        throw std::runtime_error("read_snapshot: bad header in " + path);
    Snapshot snap;
    snap.time = std::strtod(t_str.c_str(), nullptr);
    snap.name = name;
    const double box_half = std::strtod(l_str.c_str(), nullptr);
    snap.field = ScalarField(make_grid(n, box_half));
    for (double& v : snap.field.values()) v = get_le64(is);
    if (!is) throw std::runtime_error("read_snapshot: truncated payload in " + path);
    return snap;
}

const char* const kCsvHeader =
    "step,time,mass_u,mass_p,energy,dissipation,energy_slack,min_u,min_p,"
    "picard_iters,inner_iters,residual_u,residual_p,boundary_indicator,"
    "tau,source_mass,diss_w,diss_eps,diss_lap,eps_leak,max_u,max_p";

void write_diagnostics_csv(const std::string& path, const std::vector<StepDiagnostics>& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
    os << kCsvHeader << "\n";
    for (const StepDiagnostics& d : series) {
        os << d.step << ',' << format_double(d.time) << ',' << format_double(d.mass_u_after)
           << ',' << format_double(d.mass_p_after) << ',' << format_double(d.energy_after) << ','
           << format_double(d.dissipation_s) << ',' << format_double(d.energy_slack) << ','
           << format_double(d.min_u) << ',' << format_double(d.min_p) << ',' << d.picard_iters
           << ',' << d.inner_iters << ',' << format_double(d.residual_u) << ','
           << format_double(d.residual_p) << ',' << format_double(d.boundary_indicator) << ','
           << format_double(d.tau_used) << ',' << format_double(d.source_mass) << ','
           << format_double(d.diss_w) << ',' << format_double(d.diss_eps) << ','
           << format_double(d.diss_lap) << ',' << format_double(d.eps_leak_rate) << ','
           << format_double(d.max_u) << ',' << format_double(d.max_p) << "\n";
    }
}

std::vector<StepDiagnostics> read_diagnostics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_diagnostics_csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_diagnostics_csv: empty " + path);
    if (line != kCsvHeader)
        throw std::runtime_error("read_diagnostics_csv: unexpected header in " + path);

    std::vector<StepDiagnostics> series;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 22)
            throw std::runtime_error("read_diagnostics_csv: malformed row in " + path);
        StepDiagnostics d;
        size_t c = 0;
        auto num = [&]() { return std::strtod(cells[c++].c_str(), nullptr); };
        d.step = static_cast<int>(num());
        d.time = num();
        d.mass_u_after = num();
        d.mass_p_after = num();
        d.energy_after = num();
        d.dissipation_s = num();
        d.energy_slack = num();
        d.min_u = num();
        d.min_p = num();
        d.picard_iters = static_cast<int>(num());
        d.inner_iters = static_cast<int>(num());
        d.residual_u = num();
        d.residual_p = num();
        d.boundary_indicator = num();
        d.tau_used = num();
        d.source_mass = num();
        d.diss_w = num();
        d.diss_eps = num();
        d.diss_lap = num();
        d.eps_leak_rate = num();
        d.max_u = num();
        d.max_p = num();
        if (!series.empty()) {
            const StepDiagnostics& prev = series.back();
            d.mass_u_before = prev.mass_u_after;
            d.mass_p_before = prev.mass_p_after;
            d.energy_before = prev.energy_after;
        } else {
            d.mass_u_before = d.mass_u_after;
            d.mass_p_before = d.mass_p_after;
            d.energy_before = d.energy_after;
        }
        series.push_back(d);
    }
    return series;
}

void write_run_outputs(const std::string& dir, const EvolveResult& result) {
    fs::create_directories(dir);
    write_diagnostics_csv(dir + "/diagnostics.csv", result.series);

    const fs::path snap_dir = fs::path(dir) / "snapshots";
    fs::create_directories(snap_dir);
    std::ofstream idx(snap_dir / "index.csv");
    idx << "ordinal,time,u_file,p_file\n";
    for (size_t i = 0; i < result.trajectory.times.size(); ++i) {
        char uf[64], pf[64];
        std::snprintf(uf, sizeof uf, "u_%06zu.fpm", i);
        std::snprintf(pf, sizeof pf, "p_%06zu.fpm", i);
        write_snapshot((snap_dir / uf).string(), result.trajectory.u[i],
                       result.trajectory.times[i], "u");
        write_snapshot((snap_dir / pf).string(), result.trajectory.p[i],
                       result.trajectory.times[i], "p");
        idx << i << ',' << format_double(result.trajectory.times[i]) << ',' << uf << ',' << pf
            << "\n";
    }

    if (!result.completed) {
        std::ofstream marker(fs::path(dir) / "PARTIAL");
        marker << result.abort_reason << "\n";
    }
}

Trajectory read_trajectory(const std::string& dir) {
    const fs::path snap_dir = fs::path(dir) / "snapshots";
    std::ifstream idx(snap_dir / "index.csv");
    if (!idx) throw std::runtime_error("read_trajectory: missing " + (snap_dir / "index.csv").string());
    std::string line;
    std::getline(idx, line);  // header
    Trajectory traj;
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string ordinal, time, uf, pf;
        std::getline(ls, ordinal, ',');
        std::getline(ls, time, ',');
        std::getline(ls, uf, ',');
        std::getline(ls, pf, ',');
        Snapshot su = read_snapshot((snap_dir / uf).string());
        Snapshot sp = read_snapshot((snap_dir / pf).string());
        if (traj.times.empty()) traj.grid = su.field.grid();
        traj.times.push_back(su.time);
        traj.u.push_back(std::move(su.field));
        traj.p.push_back(std::move(sp.field));
    }
    return traj;
}

}  // namespace fpm
