#include "fpm/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fpm/io.hpp"

namespace fpm {

void RunConfig::validate() const {
    if (grid_n < 4 || grid_n % 2 != 0)
        throw std::invalid_argument("config grid.N: must be even and >= 4");
    if (!(grid_l > 0.0)) throw std::invalid_argument("config grid.L: must be positive");
    scheme.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("config run.T: must be positive");
    if (snapshot_every < 1) throw std::invalid_argument("config run.snapshot_every: must be >= 1");
    if (jobs < 1) throw std::invalid_argument("config run.jobs: must be >= 1");
    if (ladder_parameter != "epsilon" && ladder_parameter != "tau" && ladder_parameter != "rho1" &&
        ladder_parameter != "rho2" && ladder_parameter != "delta_grad")
        throw std::invalid_argument(
            "config ladder.parameter: expected epsilon|tau|rho1|rho2|delta_grad");
    if (!(ladder_ratio > 0.0 && ladder_ratio < 1.0))
        throw std::invalid_argument("config ladder.ratio: must lie in (0,1)");
    if (ladder_count < 2) throw std::invalid_argument("config ladder.count: must be >= 2");
    if (!(ladder_margin >= 0.0 && ladder_margin < 0.5))
        throw std::invalid_argument("config ladder.margin: must lie in [0, 0.5)");
    for (const InitSpec* spec : {&init_u, &init_p}) {
        if (spec->kind == InitSpec::Kind::gaussian && !(spec->width > 0.0))
            throw std::invalid_argument("config init width: must be positive");
        if (spec->kind == InitSpec::Kind::file && spec->path.empty())
            throw std::invalid_argument("config init file: missing path");
    }
}

namespace {

double parse_num(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config " + key + ": not a number: '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    const double v = parse_num(key, value);
    if (v != std::floor(v))
        throw std::invalid_argument("config " + key + ": expected an integer, got '" + value + "'");
    return static_cast<long>(v);
}

void parse_init(const std::string& key, const std::string& value, InitSpec& spec) {
    if (value == "zero") {
        spec.kind = InitSpec::Kind::zero;
    } else if (value == "gaussian") {
        spec.kind = InitSpec::Kind::gaussian;
    } else if (value.rfind("file:", 0) == 0) {
        spec.kind = InitSpec::Kind::file;
        spec.path = value.substr(5);
    } else {
        throw std::invalid_argument("config " + key + ": expected zero|gaussian|file:PATH");
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "grid.N") cfg.grid_n = static_cast<int>(parse_int(key, value));
        else if (key == "grid.L") cfg.grid_l = parse_num(key, value);
        else if (key == "scheme.beta") cfg.scheme.beta = parse_num(key, value);
        else if (key == "scheme.s") cfg.scheme.s = parse_num(key, value);
        else if (key == "scheme.tau") cfg.scheme.tau = parse_num(key, value);
        else if (key == "scheme.epsilon") cfg.scheme.epsilon = parse_num(key, value);
        else if (key == "scheme.rho1") cfg.scheme.rho1 = parse_num(key, value);
        else if (key == "scheme.rho2") cfg.scheme.rho2 = parse_num(key, value);
        else if (key == "scheme.theta") cfg.scheme.theta = parse_num(key, value);
        else if (key == "scheme.delta_grad") cfg.scheme.delta_grad = parse_num(key, value);
        else if (key == "scheme.picard_tol") cfg.scheme.picard_tol = parse_num(key, value);
        else if (key == "scheme.picard_max") cfg.scheme.picard_max = static_cast<int>(parse_int(key, value));
        else if (key == "scheme.inner_tol") cfg.scheme.inner_tol = parse_num(key, value);
        else if (key == "scheme.inner_max") cfg.scheme.inner_max = static_cast<int>(parse_int(key, value));
        else if (key == "scheme.tol_neg") cfg.scheme.tol_neg = parse_num(key, value);
        else if (key == "scheme.slack_tol") cfg.scheme.slack_tol = parse_num(key, value);
        else if (key == "init.u") parse_init(key, value, cfg.init_u);
        else if (key == "init.u.amplitude") cfg.init_u.amplitude = parse_num(key, value);
        else if (key == "init.u.width") cfg.init_u.width = parse_num(key, value);
        else if (key == "init.u.center_x") cfg.init_u.center_x = parse_num(key, value);
        else if (key == "init.u.center_y") cfg.init_u.center_y = parse_num(key, value);
        else if (key == "init.p") parse_init(key, value, cfg.init_p);
        else if (key == "init.p.amplitude") cfg.init_p.amplitude = parse_num(key, value);
        else if (key == "init.p.width") cfg.init_p.width = parse_num(key, value);
        else if (key == "init.p.center_x") cfg.init_p.center_x = parse_num(key, value);
        else if (key == "init.p.center_y") cfg.init_p.center_y = parse_num(key, value);
        else if (key == "run.T") cfg.horizon = parse_num(key, value);
        else if (key == "run.snapshot_every") cfg.snapshot_every = static_cast<int>(parse_int(key, value));
        else if (key == "run.seed") cfg.seed = static_cast<unsigned long>(parse_int(key, value));
        else if (key == "run.out") cfg.out_dir = value;
        else if (key == "run.retry_halve_tau") cfg.retry_halve_tau = parse_int(key, value) != 0;
        else if (key == "run.jobs") cfg.jobs = static_cast<int>(parse_int(key, value));
        else if (key == "ladder.parameter") cfg.ladder_parameter = value;
        else if (key == "ladder.ratio") cfg.ladder_ratio = parse_num(key, value);
        else if (key == "ladder.count") cfg.ladder_count = static_cast<int>(parse_int(key, value));
        else if (key == "ladder.margin") cfg.ladder_margin = parse_num(key, value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

void serialize_init(std::ostream& os, const std::string& prefix, const InitSpec& s) {
    switch (s.kind) {
        case InitSpec::Kind::zero: os << prefix << " = zero\n"; break;
        case InitSpec::Kind::gaussian: os << prefix << " = gaussian\n"; break;
        case InitSpec::Kind::file: os << prefix << " = file:" << s.path << "\n"; break;
    }
    os << prefix << ".amplitude = " << format_double(s.amplitude) << "\n";
    os << prefix << ".width = " << format_double(s.width) << "\n";
    os << prefix << ".center_x = " << format_double(s.center_x) << "\n";
    os << prefix << ".center_y = " << format_double(s.center_y) << "\n";
}

}  // namespace

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "grid.N = " << cfg.grid_n << "\n";
    os << "grid.L = " << format_double(cfg.grid_l) << "\n";
    os << "scheme.beta = " << format_double(cfg.scheme.beta) << "\n";
    os << "scheme.s = " << format_double(cfg.scheme.s) << "\n";
    os << "scheme.tau = " << format_double(cfg.scheme.tau) << "\n";
    os << "scheme.epsilon = " << format_double(cfg.scheme.epsilon) << "\n";
    os << "scheme.rho1 = " << format_double(cfg.scheme.rho1) << "\n";
    os << "scheme.rho2 = " << format_double(cfg.scheme.rho2) << "\n";
    os << "scheme.theta = " << format_double(cfg.scheme.theta) << "\n";
    os << "scheme.delta_grad = " << format_double(cfg.scheme.delta_grad) << "\n";
    os << "scheme.picard_tol = " << format_double(cfg.scheme.picard_tol) << "\n";
    os << "scheme.picard_max = " << cfg.scheme.picard_max << "\n";
    os << "scheme.inner_tol = " << format_double(cfg.scheme.inner_tol) << "\n";
    os << "scheme.inner_max = " << cfg.scheme.inner_max << "\n";
    os << "scheme.tol_neg = " << format_double(cfg.scheme.tol_neg) << "\n";
    os << "scheme.slack_tol = " << format_double(cfg.scheme.slack_tol) << "\n";
    serialize_init(os, "init.u", cfg.init_u);
    serialize_init(os, "init.p", cfg.init_p);
    os << "run.T = " << format_double(cfg.horizon) << "\n";
    os << "run.snapshot_every = " << cfg.snapshot_every << "\n";
    os << "run.seed = " << cfg.seed << "\n";
    os << "run.out = " << cfg.out_dir << "\n";
    os << "run.retry_halve_tau = " << (cfg.retry_halve_tau ? 1 : 0) << "\n";
    os << "run.jobs = " << cfg.jobs << "\n";
    os << "ladder.parameter = " << cfg.ladder_parameter << "\n";
    os << "ladder.ratio = " << format_double(cfg.ladder_ratio) << "\n";
    os << "ladder.count = " << cfg.ladder_count << "\n";
    os << "ladder.margin = " << format_double(cfg.ladder_margin) << "\n";
    return os.str();
}

ScalarField build_initial_field(const InitSpec& spec, const Grid& g) {
    switch (spec.kind) {
        case InitSpec::Kind::zero:
            return ScalarField(g, 0.0);
        case InitSpec::Kind::gaussian: {
            const double a = spec.amplitude;
            const double s2 = 2.0 * spec.width * spec.width;
            const double cx = spec.center_x, cy = spec.center_y;
            return sample(g, [=](double x, double y) {
                const double dx = x - cx, dy = y - cy;
                return a * std::exp(-(dx * dx + dy * dy) / s2);
            });
        }
        case InitSpec::Kind::file: {
            Snapshot snap = read_snapshot(spec.path);
            if (!(snap.field.grid() == g))
                throw std::runtime_error("initial snapshot " + spec.path +
                                         " does not match the configured grid");
            return snap.field;
        }
    }
    throw std::logic_error("build_initial_field: unknown kind");
}

StepState build_initial_state(const RunConfig& cfg) {
    const Grid g = make_grid(cfg.grid_n, cfg.grid_l);
    StepState st;
    st.u = build_initial_field(cfg.init_u, g);
    st.p = build_initial_field(cfg.init_p, g);
    st.time = 0.0;
    return st;
}

}  // namespace fpm
