#include "fpm/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

#include "fpm/io.hpp"

namespace fpm {

SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "epsilon") return SweepParameter::epsilon;
    if (name == "tau") return SweepParameter::tau;
    if (name == "rho2") return SweepParameter::rho2;
    if (name == "rho1") return SweepParameter::rho1;
    if (name == "delta_grad") return SweepParameter::delta_grad;
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::epsilon: return "epsilon";
        case SweepParameter::tau: return "tau";
        case SweepParameter::rho2: return "rho2";
        case SweepParameter::rho1: return "rho1";
        case SweepParameter::delta_grad: return "delta_grad";
    }
    return "?";
}

void LadderSpec::validate() const {
    base.validate();
    if (!(start > 0.0)) throw std::invalid_argument("LadderSpec: start value must be positive");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("LadderSpec: ratio must lie in (0,1)");
    if (count < 2) throw std::invalid_argument("LadderSpec: need at least two rungs");
    if (!(horizon > 0.0)) throw std::invalid_argument("LadderSpec: horizon must be positive");
    if (snapshot_every < 1) throw std::invalid_argument("LadderSpec: snapshot cadence >= 1");
    if (!(interior_margin >= 0.0 && interior_margin < 0.5))
        throw std::invalid_argument("LadderSpec: interior margin in [0, 0.5)");

    // Order of limits: epsilon, then tau, then rho2, then rho1.
    const bool needs_eps_zero = parameter == SweepParameter::tau ||
                                parameter == SweepParameter::rho2 ||
                                parameter == SweepParameter::rho1;
    if (needs_eps_zero && base.epsilon != 0.0)
        throw std::invalid_argument("LadderSpec: sweeping " + to_string(parameter) +
                                    " requires epsilon already at its terminal value 0");
    if (parameter == SweepParameter::rho1 && base.rho2 != 0.0)
        throw std::invalid_argument(
            "LadderSpec: sweeping rho1 requires rho2 already at its terminal value 0");

    if (parameter == SweepParameter::tau) {
        const double inv = 1.0 / ratio;
        if (std::abs(inv - std::round(inv)) > 1e-12)
            throw std::invalid_argument(
                "LadderSpec: tau sweeps need 1/ratio integer so snapshots align");
    }
}

namespace {

SchemeParams rung_params(const LadderSpec& spec, int rung) {
    SchemeParams par = spec.base;
    const double value = spec.start * std::pow(spec.ratio, rung);
    switch (spec.parameter) {
        case SweepParameter::epsilon: par.epsilon = value; break;
        case SweepParameter::tau: par.tau = value; break;
        case SweepParameter::rho2: par.rho2 = value; break;
        case SweepParameter::rho1: par.rho1 = value; break;
        case SweepParameter::delta_grad: par.delta_grad = value; break;
    }
    return par;
}

// Interior space-time L2 distance over the aligned snapshot times, skipping
// the initial layer of one coarsest step.
double interior_distance(const Trajectory& a, const Trajectory& b,
                         const std::vector<char>& mask, double t_margin) {
    double acc = 0.0;
    const double cell = a.grid.cell();
    for (size_t j = 1; j < a.times.size(); ++j) {
        if (a.times[j] <= t_margin * (1.0 + 1e-12)) continue;
        const double dt = a.times[j] - a.times[j - 1];
        double local = 0.0;
        for (size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) continue;
            const double d = a.u[j][i] - b.u[j][i];
            local += d * d;
        }
        acc += dt * local * cell;
    }
    return std::sqrt(acc);
}

double interior_distance_p(const Trajectory& a, const Trajectory& b,
                           const std::vector<char>& mask, double t_margin) {
    double acc = 0.0;
    const double cell = a.grid.cell();
    for (size_t j = 1; j < a.times.size(); ++j) {
        if (a.times[j] <= t_margin * (1.0 + 1e-12)) continue;
        const double dt = a.times[j] - a.times[j - 1];
        double local = 0.0;
        for (size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) continue;
            const double d = a.p[j][i] - b.p[j][i];
            local += d * d;
        }
        acc += dt * local * cell;
    }
    return std::sqrt(acc);
}

}  // namespace

LadderReport run_ladder(const LadderSpec& spec, int jobs) {
    spec.validate();
    LadderReport rep;
    rep.parameter = spec.parameter;

    const bool tau_sweep = spec.parameter == SweepParameter::tau;
    const int refine = tau_sweep ? static_cast<int>(std::llround(1.0 / spec.ratio)) : 1;

    auto run_rung = [&](int i) {
        SchemeParams par = rung_params(spec, i);
        EvolveOptions opt;
        opt.horizon = spec.horizon;
        int cadence = spec.snapshot_every;
        for (int r = 0; r < i; ++r) cadence *= refine;
        opt.snapshot_every = tau_sweep ? cadence : spec.snapshot_every;
        opt.store_trajectory = true;
        return evolve(spec.initial, par, opt);
    };

    std::vector<EvolveResult> runs(spec.count);
    if (jobs <= 1) {
        for (int i = 0; i < spec.count; ++i) runs[i] = run_rung(i);
    } else {
        std::vector<std::future<EvolveResult>> futures;
        futures.reserve(spec.count);
        for (int i = 0; i < spec.count; ++i)
            futures.push_back(std::async(std::launch::async, run_rung, i));
        for (int i = 0; i < spec.count; ++i) runs[i] = futures[i].get();
    }

    for (int i = 0; i < spec.count; ++i) {
        rep.values.push_back(spec.start * std::pow(spec.ratio, i));
        if (!runs[i].completed) {
            rep.pass = false;
            rep.detail = "rung " + std::to_string(i) + " (value " +
                         format_double(rep.values.back()) + ") aborted: " + runs[i].abort_reason;
            return rep;
        }
    }

    const Grid& g = spec.initial.u.grid();
    std::vector<char> mask(static_cast<size_t>(g.size()), 0);
    const double edge = (1.0 - spec.interior_margin) * g.box_half;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            mask[static_cast<size_t>(ix) * g.n + iy] =
                std::max(std::abs(g.coord(ix)), std::abs(g.coord(iy))) <= edge;

    // Sanity: snapshot times line up across rungs.
    for (int i = 1; i < spec.count; ++i) {
        if (runs[i].trajectory.times.size() != runs[0].trajectory.times.size())
            throw std::logic_error("run_ladder: snapshot count mismatch between rungs");
        for (size_t j = 0; j < runs[0].trajectory.times.size(); ++j)
            if (std::abs(runs[i].trajectory.times[j] - runs[0].trajectory.times[j]) >
                1e-9 * std::max(1.0, std::abs(runs[0].trajectory.times[j])))
                throw std::logic_error("run_ladder: snapshot times misaligned between rungs");
    }

    const double t_margin = tau_sweep ? spec.start : spec.base.tau;
    for (int i = 0; i + 1 < spec.count; ++i) {
        rep.cauchy_u.push_back(
            interior_distance(runs[i].trajectory, runs[i + 1].trajectory, mask, t_margin));
        rep.cauchy_p.push_back(
            interior_distance_p(runs[i].trajectory, runs[i + 1].trajectory, mask, t_margin));
    }
    const double log_ratio = std::log(1.0 / spec.ratio);
    auto order_of = [&](double a, double b) {
        if (a <= 1e-300 && b <= 1e-300) return 0.0;  // identical trajectories
        return std::log(std::max(a, 1e-300) / std::max(b, 1e-300)) / log_ratio;
    };
    for (size_t i = 0; i + 1 < rep.cauchy_u.size(); ++i) {
        rep.order_u.push_back(order_of(rep.cauchy_u[i], rep.cauchy_u[i + 1]));
        rep.order_p.push_back(order_of(rep.cauchy_p[i], rep.cauchy_p[i + 1]));
    }

    for (int i = 0; i < spec.count; ++i) {
        double sup_h = 0.0;
        for (const StepDiagnostics& d : runs[i].series) sup_h = std::max(sup_h, d.energy_after);
        rep.sup_h.push_back(sup_h);
        const TheoremNorms norms =
            check_theorem_norms(runs[i].trajectory, spec.base.beta, spec.base.s);
        rep.lbeta1_u.push_back(norms.lbeta1_spacetime_u);
        const DualNormReport dual =
            dual_norm_surrogate(runs[i].trajectory, spec.base.beta, spec.base.s);
        rep.dual_ratio_u.push_back(dual.max_ratio_u);
        rep.dual_ratio_p.push_back(dual.max_ratio_p);
        rep.divcurl.push_back(divcurl_monitor(runs[i].trajectory));
    }

    // Pass rule: enough rungs and monotone-decreasing Cauchy metrics within a
    // 10% band, for both fields.
    if (rep.cauchy_u.size() < 3) {
        rep.pass = false;
        rep.detail = "need at least 4 rungs to certify a monotone Cauchy trend";
        return rep;
    }
    rep.pass = true;
    for (size_t i = 0; i + 1 < rep.cauchy_u.size() && rep.pass; ++i) {
        if (rep.cauchy_u[i + 1] > 1.10 * rep.cauchy_u[i]) {
            rep.pass = false;
            rep.detail = "u Cauchy metric fails to decrease between rungs " + std::to_string(i) +
                         " and " + std::to_string(i + 1);
        }
        if (rep.cauchy_p[i + 1] > 1.10 * rep.cauchy_p[i]) {
            rep.pass = false;
            rep.detail = "p Cauchy metric fails to decrease between rungs " + std::to_string(i) +
                         " and " + std::to_string(i + 1);
        }
    }
    if (rep.pass) rep.detail = "monotone Cauchy decrease over " +
                               std::to_string(rep.cauchy_u.size()) + " consecutive differences";
    return rep;
}

void write_ladder_outputs(const std::string& dir, const LadderReport& rep) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream os(fs::path(dir) / "ladder_report.csv");
        os << "rung,value,cauchy_u,cauchy_p,order_u,order_p,sup_h,lbeta1_u,dual_u,dual_p\n";
        for (size_t i = 0; i < rep.values.size(); ++i) {
            os << i << ',' << format_double(rep.values[i]) << ',';
            os << (i < rep.cauchy_u.size() ? format_double(rep.cauchy_u[i]) : "") << ',';
            os << (i < rep.cauchy_p.size() ? format_double(rep.cauchy_p[i]) : "") << ',';
            os << (i < rep.order_u.size() ? format_double(rep.order_u[i]) : "") << ',';
            os << (i < rep.order_p.size() ? format_double(rep.order_p[i]) : "") << ',';
            os << (i < rep.sup_h.size() ? format_double(rep.sup_h[i]) : "") << ',';
            os << (i < rep.lbeta1_u.size() ? format_double(rep.lbeta1_u[i]) : "") << ',';
            os << (i < rep.dual_ratio_u.size() ? format_double(rep.dual_ratio_u[i]) : "") << ',';
            os << (i < rep.dual_ratio_p.size() ? format_double(rep.dual_ratio_p[i]) : "") << "\n";
        }
    }
    {
        std::ofstream os(fs::path(dir) / "summary.txt");
        os << "ladder parameter: " << to_string(rep.parameter) << "\n";
        os << "result: " << (rep.pass ? "PASS" : "FAIL") << "\n";
        os << "note: pass criterion (monotone Cauchy decrease within a 10% band) is a\n";
        os << "      harness policy; no convergence rate is claimed for the nonlinear limits.\n";
        os << "detail: " << rep.detail << "\n";
        os << "values:";
        for (double v : rep.values) os << ' ' << format_double(v);
        os << "\ncauchy_u:";
        for (double v : rep.cauchy_u) os << ' ' << format_double(v);
        os << "\ncauchy_p:";
        for (double v : rep.cauchy_p) os << ' ' << format_double(v);
        os << "\norder_u:";
        for (double v : rep.order_u) os << ' ' << format_double(v);
        os << "\norder_p:";
        for (double v : rep.order_p) os << ' ' << format_double(v);
        os << "\n";
    }
}

namespace {

double truncate_at(double x, double k) { return std::min(x, k); }

std::vector<TruncationRow> truncation_rows(
    const std::vector<const ScalarField*>& a_fields,
    const std::vector<const ScalarField*>& b_fields, const std::vector<double>& weights,
    std::span<const double> k_list, double beta) {
    const Grid& g = a_fields.front()->grid();
    const std::vector<ScalarField> battery = test_function_battery(g);
    std::vector<TruncationRow> rows;
    for (double k : k_list) {
        TruncationRow row;
        row.k = k;
        row.values.assign(battery.size(), 0.0);
        for (size_t t = 0; t < a_fields.size(); ++t) {
            const ScalarField& a = *a_fields[t];
            const ScalarField& b = *b_fields[t];
            for (size_t bi = 0; bi < battery.size(); ++bi) {
                double acc = 0.0;
                for (size_t i = 0; i < a.values().size(); ++i) {
                    const double ta = std::pow(truncate_at(std::max(a[i], 0.0), k), beta);
                    const double tb = std::pow(truncate_at(std::max(b[i], 0.0), k), beta);
                    acc += (a[i] - b[i]) * (ta - tb) * battery[bi][i];
                }
                row.values[bi] += weights[t] * acc * g.cell();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<TruncationRow> truncation_probe(const Trajectory& a, const Trajectory& b,
                                            std::span<const double> k_list, double beta) {
    if (a.times.size() != b.times.size() || a.times.empty())
        throw std::invalid_argument("truncation_probe: trajectories not aligned");
    std::vector<const ScalarField*> af, bf;
    std::vector<double> weights;
    for (size_t j = 1; j < a.times.size(); ++j) {
        af.push_back(&a.u[j]);
        bf.push_back(&b.u[j]);
        weights.push_back(a.times[j] - a.times[j - 1]);
    }
    if (af.empty()) {  // single-snapshot trajectories: unit weight
        af.push_back(&a.u[0]);
        bf.push_back(&b.u[0]);
        weights.push_back(1.0);
    }
    return truncation_rows(af, bf, weights, k_list, beta);
}

std::vector<TruncationRow> truncation_probe(const ScalarField& a, const ScalarField& b,
                                            std::span<const double> k_list, double beta) {
    return truncation_rows({&a}, {&b}, {1.0}, k_list, beta);
}

std::vector<GdeltaRow> gdelta_probe(const ScalarField& p, std::span<const double> deltas) {
    std::vector<GdeltaRow> rows;
    for (double delta : deltas) {
        if (!(delta > 0.0)) throw std::invalid_argument("gdelta_probe: delta must be positive");
        double acc = 0.0;
        for (double v : p.values()) {
            const double vp = std::max(v, 0.0);
            acc += std::min(vp / delta, 1.0) * vp;
        }
        rows.push_back({delta, acc * p.grid().cell()});
    }
    return rows;
}

double positive_part_mass(const ScalarField& p) {
    double acc = 0.0;
    for (double v : p.values()) acc += std::max(v, 0.0);
    return acc * p.grid().cell();
}

}  // namespace fpm
