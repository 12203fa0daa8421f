#pragma once

#include <string>
#include <vector>

#include "fpm/stepper.hpp"

namespace fpm {

// Field snapshot file, magic "FPM1". One ASCII header line
//
//   FPM1 <N> <L> <time> <name>\n
//
// with L and time printed as C hex floats (%a, bit-exact round trip),
// followed by N*N little-endian IEEE-754 doubles, row-major with x outer and
// y inner: value(ix, iy) at record index ix*N + iy.
struct Snapshot {
    ScalarField field;
    double time = 0.0;
    std::string name;
};

void write_snapshot(const std::string& path, const ScalarField& f, double time,
                    const std::string& name);
Snapshot read_snapshot(const std::string& path);

// Diagnostics CSV. The first fourteen columns are fixed:
//   step,time,mass_u,mass_p,energy,dissipation,energy_slack,min_u,min_p,
//   picard_iters,inner_iters,residual_u,residual_p,boundary_indicator
// followed by the extension columns
//   tau,source_mass,diss_w,diss_eps,diss_lap,max_u,max_p
// which make every recorded check recomputable from the file alone. Doubles
// are printed with 17 significant digits so a read-back is bit-identical.
extern const char* const kCsvHeader;

void write_diagnostics_csv(const std::string& path, const std::vector<StepDiagnostics>& series);
// Reconstructs the *_before fields by chaining consecutive rows.
std::vector<StepDiagnostics> read_diagnostics_csv(const std::string& path);

// diagnostics.csv + snapshots/ + PARTIAL marker on aborted runs.
void write_run_outputs(const std::string& dir, const EvolveResult& result);

// Snapshot series saved by write_run_outputs, in time order.
Trajectory read_trajectory(const std::string& dir);

std::string format_double(double v);  // %.17g

}  // namespace fpm
