#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "pmc/boundary.hpp"
#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

using SpMat = Eigen::SparseMatrix<double>;

/// Stiffness ∫ (∇φ_i)ᵀ A ∇φ_j with a per-triangle 2x2 coefficient
/// (identity when coef is empty). One-point quadrature; exact for P1.
SpMat assemble_stiffness(const Mesh& mesh, const std::vector<Mat2>& coef = {});

/// Consistent P1 mass matrix (exact).
SpMat assemble_mass(const Mesh& mesh);

/// Lumped mass m_i = ∫ φ_i, optionally weighted by a per-triangle factor.
Eigen::VectorXd lumped_mass(const Mesh& mesh, const std::vector<double>& weight = {});

/// ∫ f φ_i over the boundary loop, as a matrix on boundary-node indices.
SpMat boundary_mass(const Mesh& mesh);

/// L²(Ω) norm through the consistent mass matrix.
double l2_norm(const Mesh& mesh, const ScalarField& u);

/// L²(∂Ω) norm through the boundary mass matrix.
double boundary_l2_norm(const Mesh& mesh, const BoundaryFunction& f);

/// Dirichlet problem K u = rhs with u fixed on the boundary. Splits rows into
/// interior/boundary once and keeps the interior factorization. Cholesky by
/// default; LU for indefinite operators.
class DirichletSolver {
  public:
    enum class Method { cholesky, lu };

    DirichletSolver(const Mesh& mesh, const SpMat& K, Method method = Method::cholesky);

    /// Solve with boundary values bvals and an optional full-size load vector
    /// whose interior rows join the right-hand side.
    ScalarField solve(const BoundaryFunction& bvals, const Eigen::VectorXd& load = {}) const;

    /// Interior solve with zero boundary data.
    ScalarField solve_zero_boundary(const Eigen::VectorXd& load) const;

    /// Magnitude of the smallest eigenvalue of the interior block, estimated
    /// by inverse power iteration (the operator must be symmetric).
    double smallest_eigenvalue_estimate(int iters = 20) const;

    const SpMat& matrix() const { return K_; }

  private:
    const Mesh* mesh_;
    SpMat K_;
    SpMat Kii_, Kib_;
    Method method_;
    std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> chol_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
    Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;
};

/// Cached factorization of the boundary mass matrix; recovers nodal boundary
/// functions from hat-tested functionals.
class BoundaryMassSolver {
  public:
    explicit BoundaryMassSolver(const Mesh& mesh);
    BoundaryFunction solve(const BoundaryFunction& rhs) const;
    BoundaryFunction apply(const BoundaryFunction& f) const;

  private:
    SpMat Mb_;
    Eigen::SimplicialLDLT<SpMat> chol_;
};

/// Restrict a full nodal vector to boundary rows (loop order).
BoundaryFunction boundary_rows(const Mesh& mesh, const Eigen::VectorXd& v);

/// Scatter a boundary function into a full nodal vector (zeros elsewhere).
Eigen::VectorXd scatter_boundary(const Mesh& mesh, const BoundaryFunction& f);

}  // namespace pmc
