#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pmc/dn_map.hpp"

namespace pmc {

struct InverseOptions {
    ForwardOptions forward;
    int max_gn_iterations = 12;
    double gradient_tol = 1e-9;   // relative to the initial gradient norm
    int cg_iterations = 60;
    double cg_tol = 1e-8;
    double interior_radius = 0.9;  // error is reported on |x| <= this
};

struct ReconstructionResult {
    ScalarField source;
    std::vector<double> misfit;        // data misfit per accepted iterate
    double regularization = 0.0;
    std::optional<double> relative_error;  // vs ground truth, interior L²
    bool converged = false;
    bool stagnated = false;
    int iterations = 0;
};

/// Synthetic dataset: the base pair (f0, Λ_H f0) followed by one pair per
/// direction with Dirichlet data f0 + amplitude·dir.
DNDataset forward_data(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f0,
                       const std::vector<BoundaryFunction>& directions, double amplitude,
                       const ForwardOptions& opts = {});

/// Fourier directions cos kθ, sin kθ for k = 1..max_mode.
std::vector<BoundaryFunction> fourier_directions(const Mesh& mesh, int max_mode);

/// Fréchet derivative of H ↦ Λ_H(f) at a fixed boundary load, with its exact
/// adjoint. The derivative solves the first linearized equation with the
/// perturbation as a volume source and pushes the flux through the trace
/// conversion; the adjoint reuses the same factorized operator.
class SourceSensitivity {
  public:
    SourceSensitivity(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f,
                      const ForwardOptions& opts = {});

    /// d/dε Λ_{H+ε δH}(f) at ε = 0.
    BoundaryFunction apply(const ScalarField& delta_source) const;

    /// Adjoint with respect to the L²(∂Ω) and L²(Ω) pairings:
    /// ⟨apply(δH), b⟩_∂ = ⟨δH, adjoint(b)⟩_Ω for all δH, b.
    ScalarField adjoint(const BoundaryFunction& b) const;

    const BoundaryFunction& data() const { return data_; }

  private:
    const Mesh* mesh_;
    SpMat K_, M_;
    std::unique_ptr<DirichletSolver> solver_;
    BoundaryMassSolver bmass_;
    SpMat Mb_;
    Eigen::VectorXd nc_;  // conversion derivative at the base trace
    BoundaryFunction data_;
};

/// Tikhonov-regularized Gauss-Newton for the source, with nodal values on the
/// boundary pinned to h_boundary and a ‖∇H‖² penalty.
ReconstructionResult gauss_newton_reconstruct(const Mesh& mesh, const DNDataset& data,
                                              const BoundaryFunction& h_boundary, double reg,
                                              const InverseOptions& opts = {},
                                              const std::optional<ScalarField>& truth = {});

struct UniquenessReport {
    double dn_gap = 0.0;      // max over directions of ‖Λ_H f - Λ_H̃ f‖
    double source_gap = 0.0;  // ‖H - H̃‖_{L²}
};

/// Measures how the DN gap tracks the source gap for two sources sharing
/// boundary traces. Illustrative, not a proof.
UniquenessReport uniqueness_probe(const Mesh& mesh, const ScalarField& h1, const ScalarField& h2,
                                  const BoundaryFunction& f0,
                                  const std::vector<BoundaryFunction>& directions,
                                  double amplitude, const ForwardOptions& opts = {});

/// Additive Gaussian noise on the Neumann traces, deterministic per seed.
DNDataset add_noise(const DNDataset& data, double sigma, unsigned long long seed);

/// Morozov-style pick: smallest regularization whose converged misfit is at
/// least the noise energy.
double morozov_select(const Mesh& mesh, const DNDataset& data, const BoundaryFunction& h_boundary,
                      double noise_energy, const std::vector<double>& reg_grid,
                      const InverseOptions& opts = {});

/// Relative L² error on |x| ≤ radius.
double interior_relative_error(const Mesh& mesh, const ScalarField& estimate,
                               const ScalarField& truth, double radius);

}  // namespace pmc
