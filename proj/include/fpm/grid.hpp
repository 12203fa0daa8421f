#pragma once

#include <vector>

namespace fpm {

// Periodic square lattice on [-L, L)^2 with N points per side.
// Point (ix, iy) sits at (-L + ix*h, -L + iy*h), h = 2L/N, so the box
// center x = 0 is the grid point ix = iy = N/2. Any even N >= 4 is
// accepted; powers of two keep h*N = 2L exact in floating point and are
// fastest for the transforms.
//
// Wavenumbers use the usual DFT slot layout with fundamental wavenumber
// pi/L (the box period is 2L):
//   m(i) = i       for i <  N/2,
//   m(i) = i - N   for i >= N/2.
// Slot N/2 is the unmatched Nyquist mode. `wave_raw` carries the literal
// values (Nyquist = -N/2 * pi/L); `wave_deriv` zeroes that slot and is what
// every derivative / Fourier-multiplier operator uses.
struct Grid {
    int n = 0;
    double box_half = 0.0;  // L
    double spacing = 0.0;   // h = 2L/N
    std::vector<double> wave_raw;
    std::vector<double> wave_deriv;

    int size() const { return n * n; }
    double area() const { return 4.0 * box_half * box_half; }
    double cell() const { return spacing * spacing; }
    double coord(int i) const { return -box_half + i * spacing; }

    bool operator==(const Grid& o) const { return n == o.n && box_half == o.box_half; }
};

// Throws std::invalid_argument on odd N, N < 4 or L <= 0.
Grid make_grid(int n, double box_half);

}  // namespace fpm
