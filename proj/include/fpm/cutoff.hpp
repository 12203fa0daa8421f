#pragma once

#include <span>
#include <vector>

#include "fpm/field.hpp"

namespace fpm {

enum class CutoffKind { algebraic, cosine };

// algebraic: eta_R(x) = (1 + |x/R|^2)^(-alpha/2), alpha > 4, R >= 1.
// cosine:    1 for |x| < R, 0 for |x| > 2R, cosine ramp in between.
struct CutoffSpec {
    CutoffKind kind = CutoffKind::algebraic;
    double alpha = 5.0;  // algebraic only
    double radius = 1.0;

    void validate() const;  // throws std::invalid_argument
};

// Radial profile eta_R(r).
double cutoff_value(const CutoffSpec& spec, double r);

// eta_R sampled on the grid, centered at the box center. Throws when the
// cutoff does not fit: cosine needs 2R <= L, algebraic needs 4R <= L so the
// tail is already small at the boundary.
ScalarField cutoff_field(const CutoffSpec& spec, const Grid& g);

struct DecayRow {
    double radius = 0.0;
    double sup_norm = 0.0;       // || (-Delta)^s eta_R ||_inf on the grid
    double rate_vs_prev = 0.0;   // log(sup_{i-1}/sup_i) / log(R_i/R_{i-1}); 0 on the first row
};

struct DecayStudy {
    std::vector<DecayRow> rows;
    double fitted_exponent = 0.0;  // least-squares slope of -log sup vs log R
};

// Sup norms of (-Delta)^s eta_R over an increasing list of radii, computed
// spectrally on the given grid. Preconditions: alpha > 4, 0 < s < 1,
// radii strictly increasing, and 4 * max(R) <= L.
DecayStudy cutoff_decay_study(double alpha, double s, std::span<const double> radii,
                              const Grid& g);

}  // namespace fpm
