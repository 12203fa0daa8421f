#include "fpm/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fpm {

Grid make_grid(int n, double box_half) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("make_grid: N must be even and >= 4, got " + std::to_string(n));
    if (!(box_half > 0.0) || !std::isfinite(box_half))
        throw std::invalid_argument("make_grid: L must be positive and finite");

    Grid g;
    g.n = n;
    g.box_half = box_half;
    g.spacing = 2.0 * box_half / n;
    g.wave_raw.resize(n);
    g.wave_deriv.resize(n);
    const double dk = M_PI / box_half;
    for (int i = 0; i < n; ++i) {
        const int m = (i < n / 2) ? i : i - n;
        g.wave_raw[i] = dk * m;
        g.wave_deriv[i] = (i == n / 2) ? 0.0 : dk * m;
    }
    return g;
}

}  // namespace fpm
