#pragma once

#include "fpm/field.hpp"

namespace fpm {

// Seeded band-limited field: random amplitudes and phases on modes with
// |mx|, |my| <= max_mode, scaled so the sup norm is about `amplitude`.
// Deterministic in (grid, seed, max_mode, amplitude).
ScalarField random_band_limited(const Grid& g, unsigned long seed, int max_mode,
                                double amplitude);

// Band-limited field shifted to be nonnegative with the requested peak.
ScalarField random_nonnegative(const Grid& g, unsigned long seed, int max_mode, double peak);

}  // namespace fpm
