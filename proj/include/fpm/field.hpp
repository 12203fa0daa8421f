#pragma once

#include <functional>
#include <vector>

#include "fpm/grid.hpp"

namespace fpm {

// Real values on a Grid, row-major with x outer and y inner:
// value(ix, iy) lives at index ix*N + iy.
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), vals_(static_cast<size_t>(g.size()), fill) {}

    const Grid& grid() const { return grid_; }
    int n() const { return grid_.n; }
    int size() const { return grid_.size(); }

    double& operator()(int ix, int iy) { return vals_[static_cast<size_t>(ix) * grid_.n + iy]; }
    double operator()(int ix, int iy) const { return vals_[static_cast<size_t>(ix) * grid_.n + iy]; }
    double& operator[](size_t i) { return vals_[i]; }
    double operator[](size_t i) const { return vals_[i]; }

    double* data() { return vals_.data(); }
    const double* data() const { return vals_.data(); }
    std::vector<double>& values() { return vals_; }
    const std::vector<double>& values() const { return vals_; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double c);

  private:
    Grid grid_;
    std::vector<double> vals_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);

// f(x, y) sampled on the grid.
ScalarField sample(const Grid& g, const std::function<double(double, double)>& f);

// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);

// Signed power: sign(x) * |x|^a. Exact pass-through for a == 1.
double spow(double x, double a);
ScalarField spow(const ScalarField& f, double a);

double integral(const ScalarField& f);        // h^2 * sum
double l2h_norm(const ScalarField& f);        // sqrt(h^2 * sum f^2)
double linf_norm(const ScalarField& f);
double field_min(const ScalarField& f);
double field_max(const ScalarField& f);

bool all_finite(const ScalarField& f);
// Throws std::runtime_error naming `what` if the field carries NaN/Inf.
void require_finite(const ScalarField& f, const char* what);

// Max of |f|/peak over the outer 10% frame of the box; 0 for a zero field.
double boundary_contamination(const ScalarField& f, double margin = 0.1);

}  // namespace fpm
