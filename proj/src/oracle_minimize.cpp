#include "fpm/oracle_minimize.hpp"

#include <cmath>

namespace fpm {

namespace {

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double>& x, double rel_step) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        const double keep = x[i];
        x[i] = keep + h;
        const double fp = f(x);
        x[i] = keep - h;
        const double fm = f(x);
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

OracleResult minimize_by_values(const std::function<double(const std::vector<double>&)>& objective,
                                std::vector<double> x0, const OracleOptions& opt) {
    OracleResult res;
    res.x = std::move(x0);
    res.value = objective(res.x);

    std::vector<double> grad = fd_gradient(objective, res.x, opt.fd_step);
    std::vector<double> x_prev, g_prev;
    double step = 1.0;

    for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
        res.grad_norm = norm2(grad);
        if (res.grad_norm <= opt.grad_tol) {
            res.converged = true;
            return res;
        }

        if (!x_prev.empty()) {
            // BB1 step from the last displacement/gradient change.
            double sy = 0.0, ss = 0.0;
            for (size_t i = 0; i < res.x.size(); ++i) {
                const double si = res.x[i] - x_prev[i];
                const double yi = grad[i] - g_prev[i];
                sy += si * yi;
                ss += si * si;
            }
            step = (sy > 0.0) ? ss / sy : step;
        }
        if (!(step > 0.0) || !std::isfinite(step)) step = 1.0;

        x_prev = res.x;
        g_prev = grad;

        // Armijo backtracking on the BB step, floored at the rounding noise
        // of the objective so late steps are not rejected spuriously.
        const double noise = 8.0 * 2.2e-16 * (1.0 + std::abs(res.value));
        const double g2 = res.grad_norm * res.grad_norm;
        double t = step;
        std::vector<double> x_try(res.x.size());
        double f_try = res.value;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (size_t i = 0; i < res.x.size(); ++i) x_try[i] = res.x[i] - t * grad[i];
            f_try = objective(x_try);
            if (std::isfinite(f_try) && f_try <= res.value - 1e-4 * t * g2 + noise) {
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;  // stalled at FD-noise level

        res.x = x_try;
        res.value = f_try;
        grad = fd_gradient(objective, res.x, opt.fd_step);
    }
    res.grad_norm = norm2(grad);
    res.converged = res.grad_norm <= opt.grad_tol;
    return res;
}

}  // namespace fpm
