// Command-line front end: one subcommand per experiment plus direct access to
// the forward solver, DN map, linearization dumps, CGO sweeps and the
// reconstruction loop. All file formats are plain text; see docs/formats.md.

#include <CLI11.hpp>
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmc/cgo.hpp"
#include "pmc/config.hpp"
#include "pmc/dn_map.hpp"
#include "pmc/errors.hpp"
#include "pmc/experiments.hpp"
#include "pmc/forward.hpp"
#include "pmc/inverse.hpp"
#include "pmc/io.hpp"
#include "pmc/linearize.hpp"

namespace {

pmc::Config make_config(const std::string& config_path,
                        const std::vector<std::string>& overrides) {
    pmc::Config cfg;
    if (!config_path.empty()) cfg = pmc::load_config(config_path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw pmc::ConfigError("override must look like key=value: " + kv);
        pmc::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

pmc::ScalarField read_scalar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pmc::ConfigError("cannot read " + path);
    return pmc::load_scalar_field(in);
}

pmc::BoundaryFunction read_boundary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pmc::ConfigError("cannot read " + path);
    return pmc::load_boundary_function(in);
}

std::complex<double> parse_complex(const std::string& s) {
    // accepts forms like 0.1, 0.1+0.2i, -0.1i
    std::string t = s;
    bool has_i = false;
    if (!t.empty() && (t.back() == 'i' || t.back() == 'j')) {
        has_i = true;
        t.pop_back();
    }
    if (!has_i) return {std::stod(t), 0.0};
    // split into real and imaginary parts at the last +/- not at position 0
    for (size_t k = t.size(); k-- > 1;) {
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            const double re = std::stod(t.substr(0, k));
            const double im = std::stod(t[k] == '+' ? t.substr(k + 1) : t.substr(k));
            return {re, im};
        }
    }
    return {0.0, std::stod(t)};
}

int report_and_exit(const pmc::ExperimentResult& res) {
    for (const auto& c : res.checks)
        std::cout << (c.pass ? "[PASS] " : (c.soft ? "[MISS] " : "[FAIL] ")) << res.name << "/"
                  << c.name << ": " << c.measured << " (target " << c.target << ")\n";
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    return res.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pmc: prescribed mean curvature inverse-source laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;

    // experiment subcommands share the config options
    struct ExpCmd {
        CLI::App* cmd;
        std::string name;
    };
    std::vector<ExpCmd> experiments;
    for (const auto& name : pmc::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->add_option("--config", config_path, "pmc-config v1 file");
        sub->add_option("--set", overrides, "override, key=value (repeatable)");
        experiments.push_back({sub, name});
    }

    // pmc mesh
    auto* mesh_cmd = app.add_subcommand("mesh", "generate and dump a disk mesh");
    int mesh_level = 4;
    std::string mesh_out = "mesh.txt";
    mesh_cmd->add_option("--level", mesh_level, "refinement level (0..8)");
    mesh_cmd->add_option("--out", mesh_out, "output path");

    // pmc forward
    auto* fwd_cmd = app.add_subcommand("forward", "solve the nonlinear Dirichlet problem");
    int fwd_level = 4;
    std::string fwd_source, fwd_dirichlet, fwd_out = "u.txt";
    fwd_cmd->add_option("--mesh-level", fwd_level, "refinement level");
    fwd_cmd->add_option("--source", fwd_source, "nodal source file (index value)");
    fwd_cmd->add_option("--dirichlet", fwd_dirichlet, "boundary data file (index value)");
    fwd_cmd->add_option("--out", fwd_out, "output field path");

    // pmc dnmap
    auto* dn_cmd = app.add_subcommand("dnmap", "assemble a Dirichlet-to-Neumann dataset");
    int dn_level = 4, dn_modes = 8;
    double dn_amplitude = 1e-2;
    std::string dn_source, dn_f0, dn_out = "dataset.txt";
    dn_cmd->add_option("--mesh-level", dn_level, "refinement level");
    dn_cmd->add_option("--source", dn_source, "nodal source file");
    dn_cmd->add_option("--f0", dn_f0, "base boundary data file");
    dn_cmd->add_option("--modes", dn_modes, "Fourier modes per direction family");
    dn_cmd->add_option("--amplitude", dn_amplitude, "perturbation amplitude");
    dn_cmd->add_option("--out", dn_out, "dataset path");

    // pmc fd-lin
    auto* fd_cmd = app.add_subcommand("fd-lin", "finite-difference DN derivatives");
    int fd_level = 4, fd_order = 1;
    double fd_eps = 1e-3;
    std::string fd_source, fd_f0, fd_f1, fd_f2, fd_out = "fd.txt";
    fd_cmd->add_option("--mesh-level", fd_level, "refinement level");
    fd_cmd->add_option("--source", fd_source, "nodal source file");
    fd_cmd->add_option("--f0", fd_f0, "base boundary data file");
    fd_cmd->add_option("--f1", fd_f1, "first direction file");
    fd_cmd->add_option("--f2", fd_f2, "second direction file (order 2)");
    fd_cmd->add_option("--eps", fd_eps, "step size");
    fd_cmd->add_option("--order", fd_order, "1 or 2");
    fd_cmd->add_option("--out", fd_out, "output path");

    // pmc linearize
    auto* lin_cmd = app.add_subcommand("linearize", "metric and potential of a background");
    int lin_level = 4;
    std::string lin_u0, lin_metric_out = "metric.txt", lin_q_out;
    lin_cmd->add_option("--mesh-level", lin_level, "refinement level");
    lin_cmd->add_option("--u0", lin_u0, "background nodal field");
    lin_cmd->add_option("--out-metric", lin_metric_out, "metric dump path");
    lin_cmd->add_option("--out-q", lin_q_out, "potential dump path");

    // pmc cgo
    auto* cgo_cmd = app.add_subcommand("cgo", "build CGO remainders and sweep h");
    std::string cgo_phase = "morse", cgo_z0 = "0.1i", cgo_sweep, cgo_out = "decay.csv";
    double cgo_spacing = 0.005;
    cgo_cmd->add_option("--phase", cgo_phase, "morse | plain");
    cgo_cmd->add_option("--z0", cgo_z0, "critical point, e.g. 0.1+0.0i");
    cgo_cmd->add_option("--sweep", cgo_sweep, "comma-separated h list");
    cgo_cmd->add_option("--spacing", cgo_spacing, "grid spacing cap");
    cgo_cmd->add_option("--out", cgo_out, "CSV path");

    // pmc invert
    auto* inv_cmd = app.add_subcommand("invert", "Gauss-Newton source reconstruction");
    std::string inv_data, inv_out = "h_estimate.txt", inv_truth;
    double inv_reg = 1e-5;
    inv_cmd->add_option("--data", inv_data, "DN dataset path")->required();
    inv_cmd->add_option("--reg", inv_reg, "Tikhonov weight");
    inv_cmd->add_option("--out", inv_out, "estimate path");
    inv_cmd->add_option("--truth", inv_truth, "optional ground-truth field");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& e : experiments)
            if (e.cmd->parsed())
                return report_and_exit(pmc::run_experiment(make_config(config_path, overrides),
                                                           e.name));

        if (mesh_cmd->parsed()) {
            const pmc::Mesh mesh = pmc::generate_disk_mesh(mesh_level);
            std::ostringstream os;
            pmc::dump_mesh(os, mesh);
            pmc::write_file(mesh_out, os.str());
            std::cout << "wrote " << mesh_out << "\n";
            return 0;
        }
        if (fwd_cmd->parsed()) {
            const pmc::Mesh mesh = pmc::generate_disk_mesh(fwd_level);
            const pmc::ScalarField H = fwd_source.empty()
                                           ? pmc::ScalarField(mesh.num_nodes())
                                           : read_scalar(fwd_source);
            const pmc::BoundaryFunction f = fwd_dirichlet.empty()
                                                ? pmc::BoundaryFunction(mesh.num_boundary())
                                                : read_boundary(fwd_dirichlet);
            const auto [u, rep] = pmc::solve_pmc(mesh, H, f);
            std::ostringstream os;
            pmc::dump_scalar_field(os, u);
            pmc::write_file(fwd_out, os.str());
            std::cout << "converged in " << rep.iterations << " iterations, residual "
                      << rep.residual_norms.back() << "\n";
            std::cout << "wrote " << fwd_out << "\n";
            return 0;
        }
        if (dn_cmd->parsed()) {
            const pmc::Mesh mesh = pmc::generate_disk_mesh(dn_level);
            const pmc::ScalarField H =
                dn_source.empty() ? pmc::ScalarField(mesh.num_nodes()) : read_scalar(dn_source);
            const pmc::BoundaryFunction f0 = dn_f0.empty()
                                                 ? pmc::BoundaryFunction(mesh.num_boundary())
                                                 : read_boundary(dn_f0);
            const pmc::DNDataset data = pmc::forward_data(
                mesh, H, f0, pmc::fourier_directions(mesh, dn_modes), dn_amplitude);
            std::ostringstream os;
            pmc::dump_dndataset(os, data);
            pmc::write_file(dn_out, os.str());
            std::cout << "wrote " << dn_out << "\n";
            return 0;
        }
        if (fd_cmd->parsed()) {
            const pmc::Mesh mesh = pmc::generate_disk_mesh(fd_level);
            const pmc::ScalarField H =
                fd_source.empty() ? pmc::ScalarField(mesh.num_nodes()) : read_scalar(fd_source);
            const pmc::BoundaryFunction f0 = fd_f0.empty()
                                                 ? pmc::BoundaryFunction(mesh.num_boundary())
                                                 : read_boundary(fd_f0);
            const pmc::BoundaryFunction f1 = read_boundary(fd_f1);
            pmc::BoundaryFunction result;
            if (fd_order == 1) {
                result = pmc::fd_first_dn(mesh, H, f0, f1, fd_eps);
            } else if (fd_order == 2) {
                result = pmc::fd_second_dn(mesh, H, f0, f1, read_boundary(fd_f2), fd_eps);
            } else {
                throw pmc::InvalidArgument("fd-lin: order must be 1 or 2");
            }
            std::ostringstream os;
            pmc::dump_boundary_function(os, result);
            pmc::write_file(fd_out, os.str());
            std::cout << "wrote " << fd_out << "\n";
            return 0;
        }
        if (lin_cmd->parsed()) {
            const pmc::Mesh mesh = pmc::generate_disk_mesh(lin_level);
            const pmc::ScalarField u0 = read_scalar(lin_u0);
            const pmc::MetricField m = pmc::metric_from_gradient(pmc::gradient(mesh, u0));
            std::ostringstream os;
            pmc::dump_metric_field(os, m);
            pmc::write_file(lin_metric_out, os.str());
            std::cout << "wrote " << lin_metric_out << "\n";
            if (!lin_q_out.empty()) {
                const pmc::PotentialField q = pmc::schrodinger_potential(mesh, m);
                std::ostringstream qs;
                pmc::dump_scalar_field(qs, pmc::ScalarField(q.q));
                pmc::write_file(lin_q_out, qs.str());
                std::cout << "wrote " << lin_q_out << "\n";
            }
            return 0;
        }
        if (cgo_cmd->parsed()) {
            std::vector<double> h_list;
            if (cgo_sweep.empty()) {
                h_list = pmc::default_h_list();
            } else {
                std::istringstream ss(cgo_sweep);
                std::string item;
                while (std::getline(ss, item, ',')) h_list.push_back(std::stod(item));
            }
            double hmin = h_list.front();
            for (double h : h_list) hmin = std::min(hmin, h);
            const pmc::ComplexGrid grid =
                pmc::ComplexGrid::with_spacing(std::min(cgo_spacing, hmin / 8.0));
            const pmc::CauchyTransform ct(grid);
            const pmc::CGOPhase phase =
                cgo_phase == "morse"
                    ? pmc::make_phase(pmc::PhaseKind::holomorphic, parse_complex(cgo_z0))
                    : pmc::make_phase(pmc::PhaseKind::holomorphic);
            const pmc::ComplexGridField q = pmc::sample_field(grid, [](std::complex<double> z) {
                return 0.8 * pmc::smooth_cutoff(std::abs(z)) * std::exp(-6.0 * std::norm(z));
            });
            const pmc::ComplexGridField a =
                pmc::sample_field(grid, [](std::complex<double>) { return 1.0; });
            const pmc::DecayReport rep = pmc::decay_study(ct, q, a, phase, h_list);
            std::ostringstream os;
            os.precision(17);
            os << "h,l2_r,slope,target\n";
            for (size_t i = 0; i < rep.h.size(); ++i)
                os << rep.h[i] << "," << rep.norm[i] << "," << rep.slope << "," << rep.target
                   << "\n";
            pmc::write_file(cgo_out, os.str());
            std::cout << "slope " << rep.slope << " (target " << rep.target << ", "
                      << (rep.pass ? "pass" : "fail") << ")\n";
            std::cout << "wrote " << cgo_out << "\n";
            return rep.pass ? 0 : 1;
        }
        if (inv_cmd->parsed()) {
            std::ifstream in(inv_data);
            if (!in) throw pmc::ConfigError("cannot read " + inv_data);
            const pmc::DNDataset data = pmc::load_dndataset(in);
            const pmc::Mesh mesh = pmc::generate_disk_mesh(data.mesh_level);
            std::optional<pmc::ScalarField> truth;
            if (!inv_truth.empty()) truth = read_scalar(inv_truth);
            const pmc::ReconstructionResult rec = pmc::gauss_newton_reconstruct(
                mesh, data, data.h_trace, inv_reg, pmc::InverseOptions{}, truth);
            std::ostringstream os;
            pmc::dump_scalar_field(os, rec.source);
            pmc::write_file(inv_out, os.str());
            std::ostringstream misfit;
            misfit.precision(17);
            misfit << "iteration,misfit\n";
            for (size_t i = 0; i < rec.misfit.size(); ++i) misfit << i << "," << rec.misfit[i] << "\n";
            pmc::write_file(inv_out + ".misfit.csv", misfit.str());
            std::cout << "final misfit " << rec.misfit.back();
            if (rec.relative_error) std::cout << ", interior rel error " << *rec.relative_error;
            std::cout << "\nwrote " << inv_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "no subcommand matched\n";
    return 2;
}
