#include "fpm/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "fpm/spectral.hpp"

namespace fpm {

EnergyReport lyapunov_energy(const ScalarField& u, const ScalarField& p, double beta,
                             std::optional<double> s, double neg_tol) {
    if (!(beta > 1.0)) throw std::invalid_argument("lyapunov_energy: beta > 1 required");
    require_finite(u, "lyapunov_energy u");
    require_finite(p, "lyapunov_energy p");
    const double floor = -neg_tol * std::max(linf_norm(u), 1e-300);
    if (field_min(u) < floor)
        throw std::invalid_argument("lyapunov_energy: substantially negative density");

    EnergyReport rep;
    rep.mass_u = integral(u);
    rep.mass_p = integral(p);
    rep.bulk = integral(spow(u, beta)) / (beta - 1.0);
    rep.dirichlet = 0.5 * spectral_weighted_energy(p, 1.0);
    rep.total = rep.bulk + rep.dirichlet;
    if (s) rep.dissipation = dissipation(p, *s);
    return rep;
}

double dissipation(const ScalarField& p, double s) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("dissipation: 0 < s < 1 required");
    return spectral_weighted_energy(p, s + 1.0);
}

ScalarField weight_field(const Grid& g) {
    return sample(g, [](double x, double y) { return std::sqrt(1.0 + x * x + y * y); });
}

double lp_norm(const ScalarField& f, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lp_norm: q >= 1 required");
    double acc = 0.0;
    for (double v : f.values()) acc += std::pow(std::abs(v), q);
    return std::pow(acc * f.grid().cell(), 1.0 / q);
}

double weighted_lp_norm(const ScalarField& f, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("weighted_lp_norm: q >= 1 required");
    const Grid& g = f.grid();
    double acc = 0.0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double x = g.coord(ix);
        for (int iy = 0; iy < g.n; ++iy) {
            const double y = g.coord(iy);
            acc += std::pow(std::abs(f(ix, iy)), q) * std::sqrt(1.0 + x * x + y * y);
        }
    }
    return std::pow(acc * g.cell(), 1.0 / q);
}

double sobolev_seminorm(const ScalarField& f, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("sobolev_seminorm: q >= 1 required");
    auto [gx, gy] = gradient(f);
    double acc = 0.0;
    for (size_t i = 0; i < gx.values().size(); ++i)
        acc += std::pow(std::hypot(gx[i], gy[i]), q);
    return std::pow(acc * f.grid().cell(), 1.0 / q);
}

double h1_norm(const ScalarField& f) {
    return std::sqrt(spectral_weighted_energy(f, 0.0) + spectral_weighted_energy(f, 1.0));
}

double hs_norm(const ScalarField& f, double sigma) {
    return std::sqrt(spectral_weighted_energy(f, 0.0) + spectral_weighted_energy(f, sigma));
}

double field_norm(const ScalarField& f, const NormSpec& spec) {
    switch (spec.kind) {
        case NormSpec::Kind::lp: return lp_norm(f, spec.q);
        case NormSpec::Kind::weighted_lp: return weighted_lp_norm(f, spec.q);
        case NormSpec::Kind::sobolev_semi: return sobolev_seminorm(f, spec.q);
    }
    throw std::logic_error("field_norm: unknown kind");
}

double interpolation_exponent(double beta) {
    if (!(beta > 1.0)) throw std::invalid_argument("interpolation_exponent: beta > 1 required");
    const double r = (3.0 * beta * beta + beta - 2.0) / (2.0 * beta);
    if (!(r > beta)) throw std::logic_error("interpolation_exponent: r <= beta");
    return r;
}

}  // namespace fpm
