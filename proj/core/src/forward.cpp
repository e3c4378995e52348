#include "pmc/forward.hpp"

#include <cmath>

#include "pmc/flux.hpp"

namespace pmc {

namespace {

double interior_norm(const Mesh& mesh, const Eigen::VectorXd& R) {
    double acc = 0.0;
    for (int i : mesh.interior_nodes) acc += R[i] * R[i];
    return std::sqrt(acc);
}

std::vector<Mat2> jacobian_coefficients(const Mesh& mesh, const ScalarField& u) {
    std::vector<Mat2> coef(mesh.num_triangles());
    const GradientField g = gradient(mesh, u);
    for (int t = 0; t < mesh.num_triangles(); ++t) coef[t] = flux_jacobian(g[t]);
    return coef;
}

}  // namespace

Eigen::VectorXd pmc_residual(const Mesh& mesh, const ScalarField& u, const ScalarField& source) {
    Eigen::VectorXd R = Eigen::VectorXd::Zero(mesh.num_nodes());
    const GradientField g = gradient(mesh, u);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 F = flux(g[t]);
        for (int i = 0; i < 3; ++i)
            R[mesh.triangles[t][i]] += mesh.area[t] * F.dot(mesh.hat_gradient[t][i]);
    }
    // exact P1 mass application of the source term
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double s = source[tri[0]] + source[tri[1]] + source[tri[2]];
        for (int i = 0; i < 3; ++i) R[tri[i]] += mesh.area[t] * (s + source[tri[i]]) / 12.0;
    }
    return R;
}

ScalarField harmonic_extension(const Mesh& mesh, const BoundaryFunction& f) {
    DirichletSolver solver(mesh, assemble_stiffness(mesh));
    return solver.solve(f);
}

std::pair<ScalarField, NewtonReport> solve_pmc(const Mesh& mesh, const ScalarField& source,
                                               const BoundaryFunction& f,
                                               const ForwardOptions& opts) {
    NewtonReport rep;
    if (source.lpNorm<Eigen::Infinity>() > opts.budget_source ||
        c2_proxy_norm(f) > opts.budget_boundary)
        rep.budget_warning = true;

    ScalarField u = harmonic_extension(mesh, f);
    double r = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd R = pmc_residual(mesh, u, source);
        r = interior_norm(mesh, R);
        rep.residual_norms.push_back(r);
        rep.iterations = it;
        if (r < opts.tol) {
            rep.converged = true;
            return {u, rep};
        }
        DirichletSolver lin(mesh, assemble_stiffness(mesh, jacobian_coefficients(mesh, u)));
        Eigen::VectorXd negR = -R;
        const ScalarField du = lin.solve_zero_boundary(negR);
        double alpha = 1.0;
        ScalarField trial = u;
        while (alpha > 1e-4) {
            trial = u + alpha * du;
            if (interior_norm(mesh, pmc_residual(mesh, trial, source)) < r) break;
            alpha *= 0.5;
        }
        if (alpha <= 1e-4)
            throw NewtonError("solve_pmc: line search stagnated at residual " + std::to_string(r),
                              rep);
        rep.damping.push_back(alpha);
        u = trial;
    }
    rep.iterations = opts.max_iterations;
    throw NewtonError("solve_pmc: no convergence in " + std::to_string(opts.max_iterations) +
                          " iterations (residual " + std::to_string(r) + ")",
                      rep);
}

ScalarField manufactured_source(const Mesh& mesh, const ScalarField& u_exact) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
    const GradientField g = gradient(mesh, u_exact);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 F = flux(g[t]);
        for (int i = 0; i < 3; ++i)
            b[mesh.triangles[t][i]] -= mesh.area[t] * F.dot(mesh.hat_gradient[t][i]);
    }
    // boundary flux along the polygon edges restores the divergence theorem,
    // so constant-flux fields project to exactly zero
    for (size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const int i = mesh.boundary_edges[e][0], j = mesh.boundary_edges[e][1];
        const Vec2 edge = mesh.nodes[j] - mesh.nodes[i];
        const Vec2 nu(edge.y(), -edge.x());  // outward normal times edge length
        const Vec2 F = flux(g[mesh.boundary_edge_triangle[e]]);
        const double fl = F.dot(nu) * 0.5;
        b[i] += fl;
        b[j] += fl;
    }
    Eigen::SimplicialLDLT<SpMat> mass(assemble_mass(mesh));
    return ScalarField(mass.solve(b).eval());
}

}  // namespace pmc
