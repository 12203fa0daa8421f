#include "fpm/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fpm {

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    for (size_t i = 0; i < vals_.size(); ++i) vals_[i] += o.vals_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    for (size_t i = 0; i < vals_.size(); ++i) vals_[i] -= o.vals_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double c) {
    for (double& v : vals_) v *= c;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }

ScalarField sample(const Grid& g, const std::function<double(double, double)>& f) {
    ScalarField out(g);
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) out(ix, iy) = f(x, g.coord(iy));
    }
    return out;
}

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    ScalarField out = a;
    for (size_t i = 0; i < out.values().size(); ++i) out[i] *= b[i];
    return out;
}

double spow(double x, double a) {
    if (a == 1.0) return x;
    if (x == 0.0) return 0.0;
    return x < 0.0 ? -std::pow(-x, a) : std::pow(x, a);
}

ScalarField spow(const ScalarField& f, double a) {
    ScalarField out = f;
    if (a == 1.0) return out;
    for (double& v : out.values()) v = spow(v, a);
    return out;
}

double integral(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell();
}

double l2h_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.grid().cell());
}

double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double field_min(const ScalarField& f) {
    return *std::min_element(f.values().begin(), f.values().end());
}

double field_max(const ScalarField& f) {
    return *std::max_element(f.values().begin(), f.values().end());
}

bool all_finite(const ScalarField& f) {
    for (double v : f.values())
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const ScalarField& f, const char* what) {
    if (!all_finite(f)) throw std::runtime_error(std::string(what) + ": non-finite field values");
}

double boundary_contamination(const ScalarField& f, double margin) {
    const Grid& g = f.grid();
    const double peak = linf_norm(f);
    if (peak == 0.0) return 0.0;
    const double edge = (1.0 - margin) * g.box_half;
    double worst = 0.0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = std::abs(g.coord(ix));
        for (int iy = 0; iy < g.n; ++iy) {
            if (std::max(x, std::abs(g.coord(iy))) < edge) continue;
            worst = std::max(worst, std::abs(f(ix, iy)));
        }
    }
    return worst / peak;
}

}  // namespace fpm
