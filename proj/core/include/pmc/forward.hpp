#pragma once

#include <string>
#include <vector>

#include "pmc/boundary.hpp"
#include "pmc/errors.hpp"
#include "pmc/fem.hpp"
#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_norms;  // one entry per evaluated iterate
    std::vector<double> damping;         // accepted step lengths
    bool converged = false;
    bool budget_warning = false;
};

struct ForwardOptions {
    double tol = 1e-11;       // on the interior residual two-norm
    int max_iterations = 30;
    double budget_source = 0.5;    // ‖H‖_∞ guard
    double budget_boundary = 0.5;  // C²-proxy guard on f
};

/// Newton failed to converge; the report holds what happened.
struct NewtonError : SolverError {
    NewtonError(const std::string& msg, NewtonReport rep)
        : SolverError(msg), report(std::move(rep)) {}
    NewtonReport report;
};

/// Residual of the discrete weak form tested with every hat function:
/// R_i = ∫ F(∇u)·∇φ_i + ∫ H φ_i. Interior rows vanish at a solution;
/// boundary rows carry the variational flux.
Eigen::VectorXd pmc_residual(const Mesh& mesh, const ScalarField& u, const ScalarField& source);

/// Damped Newton solve of ∇·F(∇u) = H, u|∂Ω = f. The initial guess is the
/// discrete harmonic extension of f. Exceeding the smallness budget only
/// flags a warning in the report; the solve is still attempted.
std::pair<ScalarField, NewtonReport> solve_pmc(const Mesh& mesh, const ScalarField& source,
                                               const BoundaryFunction& f,
                                               const ForwardOptions& opts = {});

/// Nodal source that makes u_exact an exact discrete solution: solves
/// M H = -∫F(∇u*)·∇φ_i + ∮(F(∇u*)·ν)φ_i, so affine u* gives H = 0 exactly
/// and solve_pmc(manufactured_source(u*), trace(u*)) reproduces u*.
ScalarField manufactured_source(const Mesh& mesh, const ScalarField& u_exact);

/// Discrete harmonic extension of boundary data.
ScalarField harmonic_extension(const Mesh& mesh, const BoundaryFunction& f);

}  // namespace pmc
