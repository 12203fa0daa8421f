#include "fpm/random_field.hpp"

#include <cmath>
#include <random>

namespace fpm {

ScalarField random_band_limited(const Grid& g, unsigned long seed, int max_mode,
                                double amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);

    struct Mode {
        double kx, ky, a, phi;
    };
    std::vector<Mode> modes;
    const double dk = M_PI / g.box_half;
    for (int mx = 0; mx <= max_mode; ++mx)
        for (int my = -max_mode; my <= max_mode; ++my) {
            if (mx == 0 && my <= 0) continue;  // one representative per conjugate pair
            // Mild spectral decay keeps the samples smooth.
            const double decay = 1.0 / (1.0 + mx * mx + my * my);
            modes.push_back({dk * mx, dk * my, amp(rng) * decay, phase(rng)});
        }

    ScalarField f(g);
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const double y = g.coord(iy);
            double v = 0.0;
            for (const Mode& m : modes) v += m.a * std::cos(m.kx * x + m.ky * y + m.phi);
            f(ix, iy) = v;
        }
    }
    const double peak = linf_norm(f);
    if (peak > 0.0) f *= amplitude / peak;
    return f;
}

ScalarField random_nonnegative(const Grid& g, unsigned long seed, int max_mode, double peak) {
    ScalarField f = random_band_limited(g, seed, max_mode, 1.0);
    const double lo = field_min(f);
    for (double& v : f.values()) v -= lo;
    const double hi = field_max(f);
    if (hi > 0.0) f *= peak / hi;
    return f;
}

}  // namespace fpm
