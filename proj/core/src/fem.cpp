#include "pmc/fem.hpp"

#include <cmath>

#include "pmc/errors.hpp"

namespace pmc {

SpMat assemble_stiffness(const Mesh& mesh, const std::vector<Mat2>& coef) {
    const int n = mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Mat2 A = coef.empty() ? Mat2::Identity() : coef[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double v =
                    mesh.area[t] * mesh.hat_gradient[t][i].dot(A * mesh.hat_gradient[t][j]);
                trip.emplace_back(mesh.triangles[t][i], mesh.triangles[t][j], v);
            }
    }
    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SpMat assemble_mass(const Mesh& mesh) {
    const int n = mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 9);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double v = mesh.area[t] * ((i == j) ? 2.0 : 1.0) / 12.0;
                trip.emplace_back(mesh.triangles[t][i], mesh.triangles[t][j], v);
            }
    }
    SpMat M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Eigen::VectorXd lumped_mass(const Mesh& mesh, const std::vector<double>& weight) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double w = weight.empty() ? 1.0 : weight[t];
        for (int i = 0; i < 3; ++i) m[mesh.triangles[t][i]] += w * mesh.area[t] / 3.0;
    }
    return m;
}

SpMat boundary_mass(const Mesh& mesh) {
    const int m = mesh.num_boundary();
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < m; ++j) {
        const int a = j, b = (j + 1) % m;
        const double len =
            (mesh.nodes[mesh.boundary_nodes[a]] - mesh.nodes[mesh.boundary_nodes[b]]).norm();
        trip.emplace_back(a, a, len / 3.0);
        trip.emplace_back(b, b, len / 3.0);
        trip.emplace_back(a, b, len / 6.0);
        trip.emplace_back(b, a, len / 6.0);
    }
    SpMat Mb(m, m);
    Mb.setFromTriplets(trip.begin(), trip.end());
    return Mb;
}

double l2_norm(const Mesh& mesh, const ScalarField& u) {
    double acc = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        double s = 0.0, q = 0.0;
        for (int i = 0; i < 3; ++i) {
            s += u[tri[i]];
            q += u[tri[i]] * u[tri[i]];
        }
        acc += mesh.area[t] * (q + s * s) / 12.0;  // uᵀMu element contribution
    }
    return std::sqrt(std::max(0.0, acc));
}

double boundary_l2_norm(const Mesh& mesh, const BoundaryFunction& f) {
    const int m = mesh.num_boundary();
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        const int a = j, b = (j + 1) % m;
        const double len =
            (mesh.nodes[mesh.boundary_nodes[a]] - mesh.nodes[mesh.boundary_nodes[b]]).norm();
        acc += len * (f[a] * f[a] + f[a] * f[b] + f[b] * f[b]) / 3.0;
    }
    return std::sqrt(std::max(0.0, acc));
}

DirichletSolver::DirichletSolver(const Mesh& mesh, const SpMat& K, Method method)
    : mesh_(&mesh), K_(K), method_(method) {
    const int ni = mesh.num_interior();
    const int nb = mesh.num_boundary();
    std::vector<Eigen::Triplet<double>> tii, tib;
    for (int k = 0; k < K_.outerSize(); ++k) {
        for (SpMat::InnerIterator it(K_, k); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (mesh.node_on_boundary[i]) continue;
            if (!mesh.node_on_boundary[j]) {
                tii.emplace_back(mesh.interior_of[i], mesh.interior_of[j], it.value());
            } else {
                tib.emplace_back(mesh.interior_of[i], mesh.boundary_index_of[j], it.value());
            }
        }
    }
    Kii_.resize(ni, ni);
    Kii_.setFromTriplets(tii.begin(), tii.end());
    Kib_.resize(ni, nb);
    Kib_.setFromTriplets(tib.begin(), tib.end());
    if (method_ == Method::cholesky) {
        chol_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(Kii_);
        if (chol_->info() != Eigen::Success)
            throw SolverError("DirichletSolver: Cholesky factorization failed");
    } else {
        lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
        lu_->analyzePattern(Kii_);
        lu_->factorize(Kii_);
        if (lu_->info() != Eigen::Success)
            throw SolverError("DirichletSolver: LU factorization failed (singular operator?)");
    }
}

Eigen::VectorXd DirichletSolver::solve_interior(const Eigen::VectorXd& rhs) const {
    return method_ == Method::cholesky ? chol_->solve(rhs).eval() : lu_->solve(rhs).eval();
}

ScalarField DirichletSolver::solve(const BoundaryFunction& bvals, const Eigen::VectorXd& load) const {
    const Mesh& mesh = *mesh_;
    Eigen::VectorXd rhs = -Kib_ * bvals;
    if (load.size() > 0)
        for (int i = 0; i < mesh.num_interior(); ++i) rhs[i] += load[mesh.interior_nodes[i]];
    const Eigen::VectorXd ui = solve_interior(rhs);
    ScalarField u(mesh.num_nodes());
    for (int i = 0; i < mesh.num_interior(); ++i) u[mesh.interior_nodes[i]] = ui[i];
    for (int j = 0; j < mesh.num_boundary(); ++j) u[mesh.boundary_nodes[j]] = bvals[j];
    return u;
}

ScalarField DirichletSolver::solve_zero_boundary(const Eigen::VectorXd& load) const {
    return solve(BoundaryFunction(mesh_->num_boundary()), load);
}

double DirichletSolver::smallest_eigenvalue_estimate(int iters) const {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(Kii_.rows());
    x.normalize();
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        Eigen::VectorXd y = solve_interior(x);
        const double ny = y.norm();
        if (!(ny > 0.0)) return 0.0;
        x = y / ny;
        lambda = x.dot(Kii_ * x);
    }
    return std::abs(lambda);
}

BoundaryMassSolver::BoundaryMassSolver(const Mesh& mesh) : Mb_(boundary_mass(mesh)) {
    chol_.compute(Mb_);
    if (chol_.info() != Eigen::Success)
        throw SolverError("BoundaryMassSolver: factorization failed");
}

BoundaryFunction BoundaryMassSolver::solve(const BoundaryFunction& rhs) const {
    return BoundaryFunction(chol_.solve(rhs).eval());
}

BoundaryFunction BoundaryMassSolver::apply(const BoundaryFunction& f) const {
    return BoundaryFunction((Mb_ * f).eval());
}

BoundaryFunction boundary_rows(const Mesh& mesh, const Eigen::VectorXd& v) {
    BoundaryFunction out(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j) out[j] = v[mesh.boundary_nodes[j]];
    return out;
}

Eigen::VectorXd scatter_boundary(const Mesh& mesh, const BoundaryFunction& f) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int j = 0; j < mesh.num_boundary(); ++j) v[mesh.boundary_nodes[j]] = f[j];
    return v;
}

}  // namespace pmc
