#pragma once

#include <string>
#include <vector>

namespace pmc {

/// Experiment configuration; plain-text file of `key = value` lines, '#'
/// comments, with a `pmc-config v1` header. Unknown keys are rejected.
struct Config {
    int mesh_level = 4;
    double budget_source = 0.5;
    double budget_boundary = 0.5;
    double newton_tol = 1e-11;
    int newton_max_iterations = 30;
    double fd_eps = 1e-3;
    double cgo_grid_spacing = 0.005;
    std::vector<double> cgo_h_list = {0.4, 0.25, 0.16, 0.1, 0.063, 0.04};
    double gn_reg = 1e-5;
    int gn_max_iterations = 12;
    int gn_directions = 8;      // Fourier modes; two directions per mode
    double gn_amplitude = 1e-2;
    std::string out_dir;        // empty: PMC_OUT_DIR or ./pmc_out
    unsigned long long seed = 20240901ULL;

    /// Directory outputs go to, after env-var and default resolution.
    std::string resolve_out_dir() const;
};

Config load_config(const std::string& path);

/// Apply `key=value` overrides (same keys as the file).
void apply_override(Config& cfg, const std::string& key, const std::string& value);

std::string serialize_config(const Config& cfg);

}  // namespace pmc
