#include "pmc/linearize.hpp"

#include <cmath>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

std::vector<Mat2> lb_coefficients(const MetricField& m) {
    std::vector<Mat2> coef(m.A.size());
    for (size_t t = 0; t < m.A.size(); ++t) coef[t] = std::sqrt(m.det_g[t]) * m.A[t];
    return coef;
}

std::vector<double> sqrt_detg(const MetricField& m) {
    std::vector<double> w(m.det_g.size());
    for (size_t t = 0; t < w.size(); ++t) w[t] = std::sqrt(m.det_g[t]);
    return w;
}

Mat2 cell_matrix(const Mesh& mesh, const std::vector<Mat2>& f, const Vec2& p) {
    return f[static_cast<size_t>(mesh.locate(p))];
}

}  // namespace

MetricField metric_from_matrices(const std::vector<Mat2>& A) {
    MetricField m;
    m.A = A;
    m.g.resize(A.size());
    m.det_g.resize(A.size());
    m.gamma.resize(A.size());
    for (size_t t = 0; t < A.size(); ++t) {
        const double detA = A[t].determinant();
        if (!(detA > 0.0)) throw InvalidArgument("metric: A must be positive definite");
        m.g[t] = A[t].inverse();
        m.det_g[t] = 1.0 / detA;
        m.gamma[t] = std::sqrt(detA);
    }
    return m;
}

MetricField metric_from_gradient(const GradientField& grad_u0) {
    std::vector<Mat2> A(grad_u0.size());
    for (size_t t = 0; t < grad_u0.size(); ++t) A[t] = flux_jacobian(grad_u0[t]);
    return metric_from_matrices(A);
}

MetricField identity_metric(int num_triangles) {
    return metric_from_matrices(std::vector<Mat2>(num_triangles, Mat2::Identity()));
}

ScalarField laplace_beltrami(const Mesh& mesh, const MetricField& m, const ScalarField& v) {
    const SpMat K = assemble_stiffness(mesh, lb_coefficients(m));
    const Eigen::VectorXd mass = lumped_mass(mesh, sqrt_detg(m));
    const Eigen::VectorXd Kv = K * v;
    ScalarField out(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) out[i] = -Kv[i] / mass[i];
    return out;
}

PotentialField schrodinger_potential(const Mesh& mesh, const MetricField& m,
                                     const std::optional<ScalarField>& gamma_sqrt_nodal) {
    ScalarField gam(mesh.num_nodes());
    if (gamma_sqrt_nodal) {
        gam = *gamma_sqrt_nodal;
    } else {
        // area-weighted nodal average of the per-triangle values
        Eigen::VectorXd num = Eigen::VectorXd::Zero(mesh.num_nodes());
        Eigen::VectorXd den = Eigen::VectorXd::Zero(mesh.num_nodes());
        for (int t = 0; t < mesh.num_triangles(); ++t)
            for (int i = 0; i < 3; ++i) {
                num[mesh.triangles[t][i]] += mesh.area[t] * std::sqrt(m.gamma[t]);
                den[mesh.triangles[t][i]] += mesh.area[t];
            }
        for (int i = 0; i < mesh.num_nodes(); ++i) gam[i] = num[i] / den[i];
    }
    const SpMat K = assemble_stiffness(mesh, lb_coefficients(m));
    const Eigen::VectorXd mass = lumped_mass(mesh, sqrt_detg(m));
    const Eigen::VectorXd Kg = K * gam;
    PotentialField q;
    q.q.resize(mesh.num_nodes());
    q.boundary_flag.assign(mesh.num_nodes(), 0);
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        q.q[i] = Kg[i] / (mass[i] * gam[i]);
        q.boundary_flag[i] = mesh.node_on_boundary[i];
    }
    return q;
}

ConductivitySolver::ConductivitySolver(const Mesh& mesh, const MetricField& m)
    : mesh_(&mesh),
      K_(assemble_stiffness(mesh, m.A)),
      solver_(mesh, K_),
      bmass_(mesh),
      M_(assemble_mass(mesh)) {}

ScalarField ConductivitySolver::solve(const BoundaryFunction& f, const ScalarField& source) const {
    if (source.size() == 0) return solver_.solve(f);
    return solver_.solve(f, (-(M_ * source)).eval());
}

BoundaryFunction ConductivitySolver::conormal_flux(const ScalarField& v,
                                                   const ScalarField& source) const {
    Eigen::VectorXd t = K_ * v;
    if (source.size() > 0) t += M_ * source;
    return bmass_.solve(boundary_rows(*mesh_, t));
}

ScalarField solve_conductivity(const Mesh& mesh, const MetricField& m, const BoundaryFunction& f,
                               const ScalarField& source) {
    return ConductivitySolver(mesh, m).solve(f, source);
}

ScalarField solve_schrodinger(const Mesh& mesh, const MetricField& m, const PotentialField& q,
                              const BoundaryFunction& fhat) {
    SpMat K = assemble_stiffness(mesh, lb_coefficients(m));
    const Eigen::VectorXd mass = lumped_mass(mesh, sqrt_detg(m));
    // weak rows: (K v̂)_i - q_i m_i v̂_i = 0
    SpMat Q(mesh.num_nodes(), mesh.num_nodes());
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < mesh.num_nodes(); ++i) trip.emplace_back(i, i, q.q[i] * mass[i]);
    Q.setFromTriplets(trip.begin(), trip.end());
    SpMat Op = K - Q;
    DirichletSolver solver(mesh, Op, DirichletSolver::Method::lu);
    const double lam = solver.smallest_eigenvalue_estimate();
    double scale = 0.0;
    for (int k = 0; k < Op.outerSize(); ++k)
        for (SpMat::InnerIterator it(Op, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    if (lam < 1e-10 * scale)
        throw SolverError(
            "solve_schrodinger: 0 is (numerically) a discrete eigenvalue of the operator; "
            "change the mesh level or shrink the background budget");
    return solver.solve(fhat);
}

CTensorField c_tensor_field(const GradientField& grad_u0) {
    CTensorField out;
    out.C.resize(grad_u0.size());
    for (size_t t = 0; t < grad_u0.size(); ++t) out.C[t] = flux_hessian(grad_u0[t]);
    return out;
}

Eigen::VectorXd c_term_load(const Mesh& mesh, const CTensorField& C, const ScalarField& v1,
                            const ScalarField& v2) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
    const GradientField g1 = gradient(mesh, v1), g2 = gradient(mesh, v2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 cv = C.C[t].contract(g1[t], g2[t]);
        for (int i = 0; i < 3; ++i)
            b[mesh.triangles[t][i]] += mesh.area[t] * cv.dot(mesh.hat_gradient[t][i]);
    }
    return b;
}

ScalarField solve_second_linearized(const Mesh& mesh, const MetricField& m, const CTensorField& C,
                                    const ScalarField& v1, const ScalarField& v2) {
    ConductivitySolver solver(mesh, m);
    DirichletSolver lin(mesh, solver.stiffness());
    Eigen::VectorXd b = -c_term_load(mesh, C, v1, v2);
    return lin.solve_zero_boundary(b);
}

double second_lin_interior_term(const Mesh& mesh, const ScalarField& u0, const ScalarField& v0,
                                const ScalarField& v1, const ScalarField& v2) {
    const GradientField gu = gradient(mesh, u0);
    const GradientField g0 = gradient(mesh, v0), g1 = gradient(mesh, v1), g2 = gradient(mesh, v2);
    double acc = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Mat2 A = flux_jacobian(gu[t]);
        const double w2 = 1.0 + gu[t].squaredNorm();
        const double val = gu[t].dot(g0[t]) * g1[t].dot(A * g2[t]) +
                           gu[t].dot(g1[t]) * g0[t].dot(A * g2[t]) +
                           gu[t].dot(g2[t]) * g0[t].dot(A * g1[t]);
        acc -= mesh.area[t] * val / w2;
    }
    return acc;
}

double second_lin_boundary_term(const Mesh& mesh, const ScalarField& u0, const ScalarField& v0,
                                const ScalarField& v1, const ScalarField& v2, const ScalarField& w,
                                FluxMode mode) {
    const GradientField gu = gradient(mesh, u0);
    const MetricField m = metric_from_gradient(gu);
    const CTensorField C = c_tensor_field(gu);

    if (mode == FluxMode::variational) {
        const SpMat K = assemble_stiffness(mesh, m.A);
        const Eigen::VectorXd t_w = K * w + c_term_load(mesh, C, v1, v2);
        const Eigen::VectorXd t_v0 = K * v0;
        double acc = 0.0;
        for (int b : mesh.boundary_nodes) acc += v0[b] * t_w[b] - w[b] * t_v0[b];
        return acc;
    }

    // geometric: average adjacent-triangle data to boundary nodes, then use
    // the P1 boundary quadrature ∮ f ds = Σ f_i (half the two edge lengths)
    const int nn = mesh.num_nodes();
    std::vector<Vec2> gw(nn, Vec2::Zero()), gv0(nn, Vec2::Zero());
    std::vector<Vec2> cterm(nn, Vec2::Zero());
    std::vector<Mat2> An(nn, Mat2::Zero());
    Eigen::VectorXd den = Eigen::VectorXd::Zero(nn);
    const GradientField gw_t = gradient(mesh, w), gv0_t = gradient(mesh, v0);
    const GradientField g1 = gradient(mesh, v1), g2 = gradient(mesh, v2);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Vec2 cv = C.C[t].contract(g1[t], g2[t]);
        for (int i = 0; i < 3; ++i) {
            const int n = mesh.triangles[t][i];
            if (!mesh.node_on_boundary[n]) continue;
            gw[n] += mesh.area[t] * gw_t[t];
            gv0[n] += mesh.area[t] * gv0_t[t];
            cterm[n] += mesh.area[t] * cv;
            An[n] += mesh.area[t] * m.A[t];
            den[n] += mesh.area[t];
        }
    }
    const BoundaryFrame frame = boundary_frame(mesh);
    double acc = 0.0;
    const int nb = mesh.num_boundary();
    for (int j = 0; j < nb; ++j) {
        const int n = mesh.boundary_nodes[j];
        const Vec2 nu = frame.normal[j];
        const Mat2 A_b = An[n] / den[n];
        const Vec2 fw = cterm[n] / den[n] + A_b * (gw[n] / den[n]);
        const Vec2 fv = A_b * (gv0[n] / den[n]);
        const double integrand = v0[n] * fw.dot(nu) - w[n] * fv.dot(nu);
        const int jp = (j + nb - 1) % nb;
        const double ds =
            0.5 * ((mesh.nodes[mesh.boundary_nodes[(j + 1) % nb]] - mesh.nodes[n]).norm() +
                   (mesh.nodes[mesh.boundary_nodes[jp]] - mesh.nodes[n]).norm());
        acc += integrand * ds;
    }
    return acc;
}

GaugePair identity_gauge(const Mesh& mesh) {
    GaugePair g;
    g.phi = mesh.nodes;
    g.lambda = Eigen::VectorXd::Ones(mesh.num_nodes());
    g.Dphi.assign(mesh.num_triangles(), Mat2::Identity());
    g.J.assign(mesh.num_triangles(), 1.0);
    return g;
}

namespace {

GaugePair finish_gauge(const Mesh& mesh, GaugePair g) {
    g.Dphi.resize(mesh.num_triangles());
    g.J.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Mat2 D = Mat2::Zero();
        for (int i = 0; i < 3; ++i)
            D += g.phi[mesh.triangles[t][i]] * mesh.hat_gradient[t][i].transpose();
        g.Dphi[t] = D;
        g.J[t] = D.determinant();
        if (!(g.J[t] > 0.0)) throw InvalidArgument("gauge: nonpositive Jacobian");
    }
    return g;
}

}  // namespace

GaugePair twist_gauge(const Mesh& mesh, double tau) {
    GaugePair g;
    g.phi.resize(mesh.nodes.size());
    g.lambda = Eigen::VectorXd::Ones(mesh.num_nodes());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vec2& p = mesh.nodes[i];
        const double r2 = p.squaredNorm();
        const double al = tau * (1.0 - r2) * (1.0 - r2);
        const double c = std::cos(al), s = std::sin(al);
        g.phi[i] = Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
    }
    return finish_gauge(mesh, std::move(g));
}

GaugePair polynomial_gauge(const Mesh& mesh, double tau) {
    GaugePair g;
    g.phi.resize(mesh.nodes.size());
    g.lambda = Eigen::VectorXd::Ones(mesh.num_nodes());
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vec2& p = mesh.nodes[i];
        const double b = 1.0 - p.squaredNorm();
        const Vec2 psi(1.0 + 0.5 * p.y(), -0.7 + 0.4 * p.x());
        g.phi[i] = p + tau * b * b * psi;
    }
    return finish_gauge(mesh, std::move(g));
}

TField gauge_discrepancy(const Mesh& mesh, const ScalarField& u0, const ScalarField& u0_tilde,
                         const GaugePair& gauge) {
    for (double j : gauge.J)
        if (!(j > 0.0)) throw InvalidArgument("gauge_discrepancy: degenerate gauge (J <= 0)");

    // pull the far state back through the nodal map
    ScalarField composed(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) composed[i] = mesh.eval(u0_tilde, gauge.phi[i]);
    const GradientField pullback = gradient(mesh, composed);

    const GradientField gu = gradient(mesh, u0);
    const GradientField gt = gradient(mesh, u0_tilde);
    std::vector<double> gt2(gt.size());
    for (size_t t = 0; t < gt.size(); ++t) gt2[t] = gt[t].squaredNorm();

    TField T(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double lam =
            (gauge.lambda[tri[0]] + gauge.lambda[tri[1]] + gauge.lambda[tri[2]]) / 3.0;
        const Vec2 phi_c = (gauge.phi[tri[0]] + gauge.phi[tri[1]] + gauge.phi[tri[2]]) / 3.0;
        const double w2_t = 1.0 + mesh.eval_cellwise(gt2, phi_c);
        const double w2 = 1.0 + gu[t].squaredNorm();
        const double gam = 1.0 / w2;  // |g|^{-1/2} of the u0 metric
        T[t] = (lam * gauge.J[t] * pullback[t] / w2_t - gu[t] / w2) * gam;
    }
    return T;
}

MetricField pullback_metric(const Mesh& mesh, const MetricField& m_tilde, const GaugePair& gauge) {
    std::vector<Mat2> A(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double lam =
            (gauge.lambda[tri[0]] + gauge.lambda[tri[1]] + gauge.lambda[tri[2]]) / 3.0;
        const Vec2 phi_c = (gauge.phi[tri[0]] + gauge.phi[tri[1]] + gauge.phi[tri[2]]) / 3.0;
        const Mat2 At = cell_matrix(mesh, m_tilde.A, phi_c);
        const Mat2 Dinv = gauge.Dphi[t].inverse();
        A[t] = (Dinv * At * Dinv.transpose()) / lam;
    }
    return metric_from_matrices(A);
}

}  // namespace pmc
