#pragma once

#include <optional>

#include "fpm/field.hpp"

namespace fpm {

// H[u, p] = int u^beta/(beta-1) + (1/2) |grad p|^2 and friends. All integrals
// are the h^2-weighted lattice sums, which are spectrally accurate for smooth
// periodic integrands.
struct EnergyReport {
    double total = 0.0;        // H = bulk + dirichlet
    double bulk = 0.0;         // int u^beta / (beta - 1)
    double dirichlet = 0.0;    // (1/2) int |grad p|^2
    double dissipation = 0.0;  // int |(-Delta)^(s/2) grad p|^2, when s was given
    double mass_u = 0.0;
    double mass_p = 0.0;
};

// beta > 1; u must be nonnegative up to neg_tol * max|u| (negatives inside
// the tolerance contribute through the signed power, they are never clamped).
EnergyReport lyapunov_energy(const ScalarField& u, const ScalarField& p, double beta,
                             std::optional<double> s = std::nullopt,
                             double neg_tol = 1e-6);

// int |(-Delta)^(s/2) grad p|^2, computed spectrally; nonnegative for every p.
double dissipation(const ScalarField& p, double s);

// gamma(x) = sqrt(1 + |x|^2), centered at the box center.
ScalarField weight_field(const Grid& g);

// Discrete norms used as the Theorem-style monitors.
double lp_norm(const ScalarField& f, double q);                     // (int |f|^q)^(1/q), q >= 1
double weighted_lp_norm(const ScalarField& f, double q);            // against gamma dx
double sobolev_seminorm(const ScalarField& f, double q);            // || |grad f| ||_Lq
double h1_norm(const ScalarField& f);                               // sqrt(int f^2 + |grad f|^2)
double hs_norm(const ScalarField& f, double sigma);                 // sqrt(int f^2 + |(-D)^(sigma/2) f|^2)

struct NormSpec {
    enum class Kind { lp, weighted_lp, sobolev_semi } kind = Kind::lp;
    double q = 2.0;
};
double field_norm(const ScalarField& f, const NormSpec& spec);

// The interpolation exponent r = (3 beta^2 + beta - 2) / (2 beta); r > beta
// for every beta > 1 (checked).
double interpolation_exponent(double beta);

}  // namespace fpm
