#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "pmc/forward.hpp"
#include "pmc/linearize.hpp"

namespace pmc {

struct CauchyDataPair {
    BoundaryFunction dirichlet;
    BoundaryFunction neumann;  // ∂_ν u convention
};

struct DNDataset {
    int mesh_level = -1;
    BoundaryFunction f0;
    BoundaryFunction h_trace;
    std::vector<CauchyDataPair> pairs;  // pairs[0] is the base pair
};

/// ∂_ν u as a function of the conormal flux c = ν·F(∇u) and the tangential
/// derivative t = ∂_τ u: n = c sqrt((1+t²)/(1-c²)). The partials feed the
/// chain rule when differentiating the trace map in boundary data.
struct TraceConversion {
    static double value(double c, double t);
    static double d_c(double c, double t);
    static double d_t(double c, double t);
    static double d_cc(double c, double t);
    static double d_ct(double c, double t);
    static double d_tt(double c, double t);
};

struct NonlinearTrace {
    BoundaryFunction normal_derivative;  // ∂_ν u
    BoundaryFunction conormal;           // ν·F(∇u)
    BoundaryFunction tangential;         // ∂_τ u
};

/// Variational boundary flux of a PMC solution: the residual tested with
/// boundary hats gives ν·F(∇u) after boundary-mass inversion; the gradient
/// reconstructed in the tangent/normal frame then yields ∂_ν u.
NonlinearTrace neumann_trace(const Mesh& mesh, const ScalarField& u, const ScalarField& source);

/// Variational trace for a linear divergence-form problem with coefficient m.
BoundaryFunction neumann_trace(const Mesh& mesh, const MetricField& m, const ScalarField& v,
                               const ScalarField& source = {});

struct DNResult {
    CauchyDataPair pair;
    ScalarField u;
    NewtonReport report;
};

DNResult dn_apply_full(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f,
                       const ForwardOptions& opts = {});
CauchyDataPair dn_apply(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f,
                        const ForwardOptions& opts = {});

/// Central difference (Λ(f0+εf1) - Λ(f0-εf1)) / 2ε. Throws ConfigError when a
/// corner leaves the smallness budget.
BoundaryFunction fd_first_dn(const Mesh& mesh, const ScalarField& source,
                             const BoundaryFunction& f0, const BoundaryFunction& f1, double eps,
                             const ForwardOptions& opts = {});

/// Mixed second difference over the four corners f0 ± εf1 ± εf2, / 4ε².
BoundaryFunction fd_second_dn(const Mesh& mesh, const ScalarField& source,
                              const BoundaryFunction& f0, const BoundaryFunction& f1,
                              const BoundaryFunction& f2, double eps,
                              const ForwardOptions& opts = {});

/// Exact derivative of the discrete DN pipeline at a base state: the first
/// variation solves the conductivity problem with A = dF(∇u0) (the Newton
/// operator), the second adds the C-tensor load; both push through the trace
/// conversion by the chain rule. FD sweeps converge to these at slope 2.
class LinearizedDN {
  public:
    LinearizedDN(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f0,
                 const ForwardOptions& opts = {});

    /// d/dε ∂_ν u(f0 + ε f1) at ε = 0.
    BoundaryFunction first_derivative(const BoundaryFunction& f1) const;

    /// d²/dε1 dε2 ∂_ν u at ε = 0; symmetric in (f1, f2).
    BoundaryFunction second_derivative(const BoundaryFunction& f1,
                                       const BoundaryFunction& f2) const;

    /// Solution of the first linearized equation with boundary data f1.
    ScalarField linearized_solution(const BoundaryFunction& f1) const;

    const ScalarField& base_solution() const { return u0_; }
    const MetricField& metric() const { return metric_; }

  private:
    const Mesh* mesh_;
    ScalarField u0_;
    MetricField metric_;
    CTensorField ctensor_;
    std::unique_ptr<ConductivitySolver> solver_;
    std::unique_ptr<DirichletSolver> lin_;
    BoundaryMassSolver bmass_;
    BoundaryFunction c0_, t0_;  // base conormal and tangential traces

    struct Directional {
        ScalarField v;
        BoundaryFunction dc, dt;
    };
    Directional directional(const BoundaryFunction& f1) const;
};

void dump_dndataset(std::ostream& os, const DNDataset& d);
DNDataset load_dndataset(std::istream& is);

}  // namespace pmc
