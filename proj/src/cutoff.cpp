#include "fpm/cutoff.hpp"

#include <cmath>
#include <stdexcept>

#include "fpm/spectral.hpp"

namespace fpm {

void CutoffSpec::validate() const {
    if (!(radius >= 1.0)) throw std::invalid_argument("CutoffSpec: R >= 1 required");
    if (kind == CutoffKind::algebraic && !(alpha > 4.0))
        throw std::invalid_argument("CutoffSpec: algebraic cutoff needs alpha > 4");
}

double cutoff_value(const CutoffSpec& spec, double r) {
    const double R = spec.radius;
    if (spec.kind == CutoffKind::algebraic) {
        const double t = r / R;
        return std::pow(1.0 + t * t, -0.5 * spec.alpha);
    }
    if (r < R) return 1.0;
    if (r > 2.0 * R) return 0.0;
    return 0.5 * (std::cos(M_PI * (r / R - 1.0)) + 1.0);
}

ScalarField cutoff_field(const CutoffSpec& spec, const Grid& g) {
    spec.validate();
    const double L = g.box_half;
    if (spec.kind == CutoffKind::cosine && !(2.0 * spec.radius <= L))
        throw std::invalid_argument("cutoff_field: cosine support 2R exceeds the box");
    if (spec.kind == CutoffKind::algebraic && !(4.0 * spec.radius <= L))
        throw std::invalid_argument("cutoff_field: algebraic tail too wide for the box (need 4R <= L)");
    return sample(g, [&](double x, double y) { return cutoff_value(spec, std::hypot(x, y)); });
}

DecayStudy cutoff_decay_study(double alpha, double s, std::span<const double> radii,
                              const Grid& g) {
    if (!(alpha > 4.0)) throw std::invalid_argument("cutoff_decay_study: alpha > 4 required");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("cutoff_decay_study: 0 < s < 1 required");
    if (radii.size() < 2) throw std::invalid_argument("cutoff_decay_study: need at least two radii");
    for (size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1]))
            throw std::invalid_argument("cutoff_decay_study: radii must be strictly increasing");
    if (!(4.0 * radii.back() <= g.box_half))
        throw std::invalid_argument("cutoff_decay_study: grid too small relative to max R");

    DecayStudy study;
    for (size_t i = 0; i < radii.size(); ++i) {
        CutoffSpec spec{CutoffKind::algebraic, alpha, radii[i]};
        const ScalarField eta = cutoff_field(spec, g);
        DecayRow row;
        row.radius = radii[i];
        row.sup_norm = linf_norm(fractional_laplacian(eta, s));
        if (i > 0) {
            const DecayRow& prev = study.rows.back();
            row.rate_vs_prev = std::log(prev.sup_norm / row.sup_norm) /
                               std::log(row.radius / prev.radius);
        }
        study.rows.push_back(row);
    }

    // Least-squares slope of log(sup) against log(R); report the decay
    // exponent as its negation.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(study.rows.size());
    for (const DecayRow& r : study.rows) {
        const double lx = std::log(r.radius);
        const double ly = std::log(r.sup_norm);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    study.fitted_exponent = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    return study;
}

}  // namespace fpm
