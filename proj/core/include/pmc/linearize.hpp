#pragma once

#include <optional>
#include <vector>

#include "pmc/fem.hpp"
#include "pmc/flux.hpp"
#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

/// Per-triangle inverse metric A = g^{-1} (SPD) with derived fields. For a
/// metric built from a background gradient, det A = (1+|∇u0|²)^{-2} and
/// gamma = (1+|∇u0|²)^{-1} hold to roundoff.
struct MetricField {
    std::vector<Mat2> A;       // inverse metric, SPD
    std::vector<Mat2> g;       // metric = A^{-1}
    std::vector<double> det_g;
    std::vector<double> gamma;  // |g|^{-1/2}

    int size() const { return static_cast<int>(A.size()); }
};

/// Nodal Schrödinger potential; entries at boundary nodes come from one-sided
/// stencils and are flagged unreliable.
struct PotentialField {
    Eigen::VectorXd q;
    std::vector<char> boundary_flag;
};

struct CTensorField {
    std::vector<FluxHessian> C;
    int size() const { return static_cast<int>(C.size()); }
};

/// Boundary-fixing diffeomorphism of the disk with conformal factor.
struct GaugePair {
    std::vector<Vec2> phi;      // nodal image points
    Eigen::VectorXd lambda;     // nodal, positive, = 1 on the boundary
    std::vector<Mat2> Dphi;     // per-triangle P1 Jacobian
    std::vector<double> J;      // det(Dphi), must stay positive
};

using TField = std::vector<Vec2>;  // per-triangle discrepancy vectors

MetricField metric_from_gradient(const GradientField& grad_u0);
MetricField metric_from_matrices(const std::vector<Mat2>& A);
MetricField identity_metric(int num_triangles);

/// Mass-lumped divergence-form Laplace–Beltrami of a nodal field:
/// (Δ_g v)_i = -(K_g v)_i / m_i with K_g built from |g|^{1/2} g^{-1}.
/// Boundary rows use one-sided information and are not consistent.
ScalarField laplace_beltrami(const Mesh& mesh, const MetricField& m, const ScalarField& v);

/// q with q γ^{1/2} = Δ_g(γ^{1/2}) in the sign convention that makes
/// (Δ_g + q)(γ^{1/2} v) vanish for conductivity solutions v. The optional
/// nodal γ^{1/2} overrides the default per-triangle average (useful when the
/// background is known in closed form).
PotentialField schrodinger_potential(const Mesh& mesh, const MetricField& m,
                                     const std::optional<ScalarField>& gamma_sqrt_nodal = {});

/// Cached-factorization solver for ∇·(g^{-1}∇v) = source, v|∂Ω = f.
class ConductivitySolver {
  public:
    ConductivitySolver(const Mesh& mesh, const MetricField& m);

    ScalarField solve(const BoundaryFunction& f, const ScalarField& source = {}) const;

    /// Variational conormal flux ν·A∇v of a solved field (nodal, on ∂Ω).
    BoundaryFunction conormal_flux(const ScalarField& v, const ScalarField& source = {}) const;

    const SpMat& stiffness() const { return K_; }
    const Mesh& mesh() const { return *mesh_; }

  private:
    const Mesh* mesh_;
    SpMat K_;
    DirichletSolver solver_;
    BoundaryMassSolver bmass_;
    SpMat M_;
};

ScalarField solve_conductivity(const Mesh& mesh, const MetricField& m, const BoundaryFunction& f,
                               const ScalarField& source = {});

/// (Δ_g + q) v̂ = 0 with v̂|∂Ω = fhat. Checks that 0 is not a discrete
/// eigenvalue and throws SolverError with a hint otherwise.
ScalarField solve_schrodinger(const Mesh& mesh, const MetricField& m, const PotentialField& q,
                              const BoundaryFunction& fhat);

CTensorField c_tensor_field(const GradientField& grad_u0);

/// w with zero boundary data solving ∂_a(C^{abc}∂_c v1 ∂_b v2 + g^{ab}∂_b w) = 0.
ScalarField solve_second_linearized(const Mesh& mesh, const MetricField& m, const CTensorField& C,
                                    const ScalarField& v1, const ScalarField& v2);

/// Hat-tested load b_i = ∫ C[∇v1,∇v2]·∇φ_i (all rows).
Eigen::VectorXd c_term_load(const Mesh& mesh, const CTensorField& C, const ScalarField& v1,
                            const ScalarField& v2);

/// Interior cubic pairing of the second linearization:
/// I = -∫ ∇u0/(1+|∇u0|²)·(∇v0 A(∇v1,∇v2) + ∇v1 A(∇v0,∇v2) + ∇v2 A(∇v0,∇v1)).
/// Exact quadrature for P1 fields; symmetric under permuting (v0, v1, v2).
double second_lin_interior_term(const Mesh& mesh, const ScalarField& u0, const ScalarField& v0,
                                const ScalarField& v1, const ScalarField& v2);

enum class FluxMode {
    variational,  // hat-tested fluxes; pairs exactly with the interior term
    geometric     // pointwise reconstructed fluxes; O(h) consistent
};

/// Boundary pairing B = ∮ (C[∇v1,∇v2] + A∇w)·ν v0 - w (A∇v0·ν) over ∂Ω.
double second_lin_boundary_term(const Mesh& mesh, const ScalarField& u0, const ScalarField& v0,
                                const ScalarField& v1, const ScalarField& v2, const ScalarField& w,
                                FluxMode mode = FluxMode::variational);

GaugePair identity_gauge(const Mesh& mesh);

/// Area-preserving twist φ(r,θ) = (r, θ + τ(1-r²)²): fixes the boundary to
/// second order, J ≡ 1, λ ≡ 1. Keep τ ≤ 0.05.
GaugePair twist_gauge(const Mesh& mesh, double tau);

/// φ(x) = x + τ (1-|x|²)² ψ(x) with a fixed smooth polynomial ψ.
GaugePair polynomial_gauge(const Mesh& mesh, double tau);

/// Discrepancy field T = (λ J φ*∇ũ0 / (1+|∇ũ0|²∘φ) - ∇u0/(1+|∇u0|²)) |g|^{-1/2}
/// per triangle; identically zero when the states coincide and the gauge is
/// trivial. Throws on a degenerate gauge (J ≤ 0).
TField gauge_discrepancy(const Mesh& mesh, const ScalarField& u0, const ScalarField& u0_tilde,
                         const GaugePair& gauge);

/// Inverse-metric transformation A = λ^{-1} (Dφ)^{-1} Ã∘φ (Dφ)^{-T}.
MetricField pullback_metric(const Mesh& mesh, const MetricField& m_tilde, const GaugePair& gauge);

}  // namespace pmc
