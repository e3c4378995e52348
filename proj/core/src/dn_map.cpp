#include "pmc/dn_map.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pmc/errors.hpp"
#include "pmc/flux.hpp"

namespace pmc {

double TraceConversion::value(double c, double t) {
    return c * std::sqrt((1.0 + t * t) / (1.0 - c * c));
}
double TraceConversion::d_c(double c, double t) {
    return std::sqrt(1.0 + t * t) * std::pow(1.0 - c * c, -1.5);
}
double TraceConversion::d_t(double c, double t) {
    return c * t / std::sqrt((1.0 + t * t) * (1.0 - c * c));
}
double TraceConversion::d_cc(double c, double t) {
    return 3.0 * c * std::sqrt(1.0 + t * t) * std::pow(1.0 - c * c, -2.5);
}
double TraceConversion::d_ct(double c, double t) {
    return t / std::sqrt(1.0 + t * t) * std::pow(1.0 - c * c, -1.5);
}
double TraceConversion::d_tt(double c, double t) {
    return c * std::pow(1.0 + t * t, -1.5) / std::sqrt(1.0 - c * c);
}

NonlinearTrace neumann_trace(const Mesh& mesh, const ScalarField& u, const ScalarField& source) {
    BoundaryMassSolver bmass(mesh);
    const Eigen::VectorXd R = pmc_residual(mesh, u, source);
    NonlinearTrace out;
    out.conormal = bmass.solve(boundary_rows(mesh, R));
    out.tangential = tangential_derivative(boundary_trace(mesh, u), 1);
    out.normal_derivative = BoundaryFunction(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        double c = out.conormal[j];
        // |ν·F| < 1 analytically; clip the variational overshoot
        c = std::clamp(c, -1.0 + 1e-14, 1.0 - 1e-14);
        out.normal_derivative[j] = TraceConversion::value(c, out.tangential[j]);
    }
    return out;
}

BoundaryFunction neumann_trace(const Mesh& mesh, const MetricField& m, const ScalarField& v,
                               const ScalarField& source) {
    return ConductivitySolver(mesh, m).conormal_flux(v, source);
}

DNResult dn_apply_full(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f,
                       const ForwardOptions& opts) {
    auto [u, rep] = solve_pmc(mesh, source, f, opts);
    DNResult out;
    out.pair.dirichlet = f;
    out.pair.neumann = neumann_trace(mesh, u, source).normal_derivative;
    out.u = std::move(u);
    out.report = std::move(rep);
    return out;
}

CauchyDataPair dn_apply(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f,
                        const ForwardOptions& opts) {
    return dn_apply_full(mesh, source, f, opts).pair;
}

namespace {

void check_budget(const BoundaryFunction& f, const ForwardOptions& opts, const char* who) {
    if (c2_proxy_norm(f) > opts.budget_boundary)
        throw ConfigError(std::string(who) + ": perturbed boundary data leaves the smallness budget");
}

}  // namespace

BoundaryFunction fd_first_dn(const Mesh& mesh, const ScalarField& source,
                             const BoundaryFunction& f0, const BoundaryFunction& f1, double eps,
                             const ForwardOptions& opts) {
    if (!(eps > 0.0)) throw InvalidArgument("fd_first_dn: eps must be positive");
    const BoundaryFunction fp = f0 + eps * f1, fm = f0 - eps * f1;
    check_budget(fp, opts, "fd_first_dn");
    check_budget(fm, opts, "fd_first_dn");
    const CauchyDataPair p = dn_apply(mesh, source, fp, opts);
    const CauchyDataPair m = dn_apply(mesh, source, fm, opts);
    return BoundaryFunction((p.neumann - m.neumann) / (2.0 * eps));
}

BoundaryFunction fd_second_dn(const Mesh& mesh, const ScalarField& source,
                              const BoundaryFunction& f0, const BoundaryFunction& f1,
                              const BoundaryFunction& f2, double eps, const ForwardOptions& opts) {
    if (!(eps > 0.0)) throw InvalidArgument("fd_second_dn: eps must be positive");
    const BoundaryFunction fpp = f0 + eps * f1 + eps * f2;
    const BoundaryFunction fpm = f0 + eps * f1 - eps * f2;
    const BoundaryFunction fmp = f0 - eps * f1 + eps * f2;
    const BoundaryFunction fmm = f0 - eps * f1 - eps * f2;
    for (const auto* f : {&fpp, &fpm, &fmp, &fmm}) check_budget(*f, opts, "fd_second_dn");
    const BoundaryFunction npp = dn_apply(mesh, source, fpp, opts).neumann;
    const BoundaryFunction npm = dn_apply(mesh, source, fpm, opts).neumann;
    const BoundaryFunction nmp = dn_apply(mesh, source, fmp, opts).neumann;
    const BoundaryFunction nmm = dn_apply(mesh, source, fmm, opts).neumann;
    return BoundaryFunction((npp - npm - nmp + nmm) / (4.0 * eps * eps));
}

LinearizedDN::LinearizedDN(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f0,
                           const ForwardOptions& opts)
    : mesh_(&mesh), bmass_(mesh) {
    u0_ = solve_pmc(mesh, source, f0, opts).first;
    const GradientField g = gradient(mesh, u0_);
    metric_ = metric_from_gradient(g);
    ctensor_ = c_tensor_field(g);
    solver_ = std::make_unique<ConductivitySolver>(mesh, metric_);
    lin_ = std::make_unique<DirichletSolver>(mesh, solver_->stiffness());
    const NonlinearTrace base = neumann_trace(mesh, u0_, source);
    c0_ = base.conormal;
    t0_ = base.tangential;
}

LinearizedDN::Directional LinearizedDN::directional(const BoundaryFunction& f1) const {
    Directional d;
    d.v = solver_->solve(f1);
    d.dc = bmass_.solve(boundary_rows(*mesh_, solver_->stiffness() * d.v));
    d.dt = tangential_derivative(f1, 1);
    return d;
}

ScalarField LinearizedDN::linearized_solution(const BoundaryFunction& f1) const {
    return solver_->solve(f1);
}

BoundaryFunction LinearizedDN::first_derivative(const BoundaryFunction& f1) const {
    const Directional d = directional(f1);
    BoundaryFunction out(mesh_->num_boundary());
    for (int j = 0; j < mesh_->num_boundary(); ++j)
        out[j] = TraceConversion::d_c(c0_[j], t0_[j]) * d.dc[j] +
                 TraceConversion::d_t(c0_[j], t0_[j]) * d.dt[j];
    return out;
}

BoundaryFunction LinearizedDN::second_derivative(const BoundaryFunction& f1,
                                                 const BoundaryFunction& f2) const {
    const Directional d1 = directional(f1);
    const Directional d2 = directional(f2);
    const Eigen::VectorXd bC = c_term_load(*mesh_, ctensor_, d1.v, d2.v);
    Eigen::VectorXd negbC = -bC;
    const ScalarField w = lin_->solve_zero_boundary(negbC);
    const BoundaryFunction ddc =
        bmass_.solve(boundary_rows(*mesh_, solver_->stiffness() * w + bC));
    BoundaryFunction out(mesh_->num_boundary());
    for (int j = 0; j < mesh_->num_boundary(); ++j) {
        const double c = c0_[j], t = t0_[j];
        // mixed second derivative of n(c(ε), t(ε)); t is affine in ε so ẗ = 0
        out[j] = TraceConversion::d_c(c, t) * ddc[j] +
                 TraceConversion::d_cc(c, t) * d1.dc[j] * d2.dc[j] +
                 TraceConversion::d_ct(c, t) * (d1.dc[j] * d2.dt[j] + d2.dc[j] * d1.dt[j]) +
                 TraceConversion::d_tt(c, t) * d1.dt[j] * d2.dt[j];
    }
    return out;
}

void dump_dndataset(std::ostream& os, const DNDataset& d) {
    os.precision(17);
    const int m = static_cast<int>(d.f0.size());
    const int kmax = m / 2;
    auto put = [&](const BoundaryFunction& f) {
        const FourierCoeffs c = fourier_analyze(f, kmax);
        os << c.a0;
        for (int k = 0; k < c.max_mode(); ++k) os << " " << c.a[k] << " " << c.b[k];
        os << "\n";
    };
    os << "pmc-dndataset v1\n";
    os << "mesh_level " << d.mesh_level << "\n";
    os << "boundary_nodes " << m << "\n";
    os << "pairs " << d.pairs.size() << "\n";
    os << "f0-fourier ";
    put(d.f0);
    os << "htrace-fourier ";
    put(d.h_trace);
    for (size_t i = 0; i < d.pairs.size(); ++i) {
        os << "pair " << i << "\n";
        os << "dirichlet-fourier ";
        put(d.pairs[i].dirichlet);
        os << "neumann-fourier ";
        put(d.pairs[i].neumann);
    }
}

DNDataset load_dndataset(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "pmc-dndataset v1")
        throw InvalidArgument("load_dndataset: bad header");
    DNDataset d;
    int m = 0;
    size_t npairs = 0;
    auto get = [&](std::istringstream& ss) {
        FourierCoeffs c;
        ss >> c.a0;
        double a, b;
        while (ss >> a >> b) {
            c.a.push_back(a);
            c.b.push_back(b);
        }
        return fourier_synthesize(c, m);
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "mesh_level") ss >> d.mesh_level;
        else if (key == "boundary_nodes") ss >> m;
        else if (key == "pairs") ss >> npairs;
        else if (key == "f0-fourier") d.f0 = get(ss);
        else if (key == "htrace-fourier") d.h_trace = get(ss);
        else if (key == "pair") d.pairs.emplace_back();
        else if (key == "dirichlet-fourier") d.pairs.back().dirichlet = get(ss);
        else if (key == "neumann-fourier") d.pairs.back().neumann = get(ss);
        else throw InvalidArgument("load_dndataset: unknown key " + key);
    }
    if (d.pairs.size() != npairs) throw InvalidArgument("load_dndataset: pair count mismatch");
    return d;
}

}  // namespace pmc
