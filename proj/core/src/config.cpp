#include "pmc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

std::string Config::resolve_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("PMC_OUT_DIR"); env && *env) return env;
    return "pmc_out";
}

void apply_override(Config& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "mesh_level") cfg.mesh_level = std::stoi(value);
        else if (key == "budget_source") cfg.budget_source = std::stod(value);
        else if (key == "budget_boundary") cfg.budget_boundary = std::stod(value);
        else if (key == "newton_tol") cfg.newton_tol = std::stod(value);
        else if (key == "newton_max_iterations") cfg.newton_max_iterations = std::stoi(value);
        else if (key == "fd_eps") cfg.fd_eps = std::stod(value);
        else if (key == "cgo_grid_spacing") cfg.cgo_grid_spacing = std::stod(value);
        else if (key == "cgo_h_list") cfg.cgo_h_list = parse_list(value);
        else if (key == "gn_reg") cfg.gn_reg = std::stod(value);
        else if (key == "gn_max_iterations") cfg.gn_max_iterations = std::stoi(value);
        else if (key == "gn_directions") cfg.gn_directions = std::stoi(value);
        else if (key == "gn_amplitude") cfg.gn_amplitude = std::stod(value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "seed") cfg.seed = std::stoull(value);
        else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: bad value for key '" + key + "': " + value);
    }
    if (cfg.newton_tol <= 0 || cfg.fd_eps <= 0 || cfg.cgo_grid_spacing <= 0 || cfg.gn_reg <= 0 ||
        cfg.gn_amplitude <= 0)
        throw ConfigError("config: tolerances and step sizes must be positive");
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "pmc-config v1")
        throw ConfigError("config: missing 'pmc-config v1' header in " + path);
    Config cfg;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + line);
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string serialize_config(const Config& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "pmc-config v1\n";
    os << "mesh_level = " << cfg.mesh_level << "\n";
    os << "budget_source = " << cfg.budget_source << "\n";
    os << "budget_boundary = " << cfg.budget_boundary << "\n";
    os << "newton_tol = " << cfg.newton_tol << "\n";
    os << "newton_max_iterations = " << cfg.newton_max_iterations << "\n";
    os << "fd_eps = " << cfg.fd_eps << "\n";
    os << "cgo_grid_spacing = " << cfg.cgo_grid_spacing << "\n";
    os << "cgo_h_list = ";
    for (size_t i = 0; i < cfg.cgo_h_list.size(); ++i)
        os << (i ? "," : "") << cfg.cgo_h_list[i];
    os << "\n";
    os << "gn_reg = " << cfg.gn_reg << "\n";
    os << "gn_max_iterations = " << cfg.gn_max_iterations << "\n";
    os << "gn_directions = " << cfg.gn_directions << "\n";
    os << "gn_amplitude = " << cfg.gn_amplitude << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    os << "seed = " << cfg.seed << "\n";
    return os.str();
}

}  // namespace pmc
