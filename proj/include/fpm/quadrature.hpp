#pragma once

#include <functional>
#include <vector>

namespace fpm {

// Principal-value evaluation of (-Delta)^s f at a point, independent of any
// grid. Uses the symmetric-difference kernel
//
//   (-Delta)^s f(x) = c(s) * int [2 f(x) - f(x+y) - f(x-y)] / (2 |y|^(2+2s)) dy
//
// with the two-dimensional normalization c(s) = 4^s s Gamma(1+s) / (pi Gamma(1-s)),
// which makes the integral agree with the Fourier multiplier |k|^(2s).
//
// The integral is split at |y| = split_radius (singular part, integrated with
// a desingularizing radial substitution), then log-spaced panels out to
// far_radius, and an analytic tail that freezes the symmetric difference at
// its far_radius value. far_radius must cover the effective support of f for
// the tail to be accurate (constants are annihilated exactly regardless).
struct PvOptions {
    double split_radius = 1.0;
    double far_radius = 40.0;
    int radial_nodes = 24;       // Gauss-Legendre nodes inside the split radius
    int angular_nodes = 32;      // trapezoid nodes on the half circle
    int mid_radial_nodes = 12;   // Gauss-Legendre nodes per log panel
    int panels_per_octave = 4;
};

struct PvResult {
    double value = 0.0;
    // Relative gap between the near-field integral at full and at halved
    // resolution; large values signal an integrand too rough to trust.
    double near_refinement_gap = 0.0;
    bool reduced_confidence = false;
};

// f must be twice differentiable near (x, y); 0 < s < 1; radii positive.
PvResult fractional_laplacian_quadrature(const std::function<double(double, double)>& f,
                                         double s, double x, double y,
                                         const PvOptions& opt = {});

// Nodes/weights of the n-point Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// The normalization constant c(s) above.
double pv_normalization(double s);

}  // namespace fpm
