#pragma once

#include <string>

#include "fpm/stepper.hpp"

namespace fpm {

// Flat key-value run configuration with dotted sections; '#' starts a
// comment. Unknown keys and malformed values are reported by name.
struct InitSpec {
    enum class Kind { zero, gaussian, file };
    Kind kind = Kind::zero;
    double amplitude = 1.0;
    double width = 2.0;
    double center_x = 0.0;
    double center_y = 0.0;
    std::string path;  // Kind::file
};

struct RunConfig {
    int grid_n = 128;
    double grid_l = 20.0;
    SchemeParams scheme;
    InitSpec init_u{InitSpec::Kind::gaussian, 1.0, 2.0, 0.0, 0.0, ""};
    InitSpec init_p{InitSpec::Kind::zero, 1.0, 2.0, 0.0, 0.0, ""};
    double horizon = 0.2;
    int snapshot_every = 10;
    unsigned long seed = 0;
    std::string out_dir = "out";
    bool retry_halve_tau = false;
    int jobs = 1;

    // ladder block
    std::string ladder_parameter = "rho1";
    double ladder_ratio = 0.5;
    int ladder_count = 4;
    double ladder_margin = 0.1;

    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Every field materialized, parseable by parse_config_text; written next to
// run outputs for reproducibility.
std::string serialize_config(const RunConfig& cfg);

ScalarField build_initial_field(const InitSpec& spec, const Grid& g);
StepState build_initial_state(const RunConfig& cfg);

}  // namespace fpm
