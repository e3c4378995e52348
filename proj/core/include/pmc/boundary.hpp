#pragma once

#include <vector>

#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

/// Real Fourier coefficients on the boundary circle: f(θ) ≈ a0/2 +
/// Σ_{k=1..K} a_k cos kθ + b_k sin kθ. The Nyquist cosine (k = m/2) carries
/// the conventional half weight when present.
struct FourierCoeffs {
    double a0 = 0.0;
    std::vector<double> a;  // a[k-1] multiplies cos(kθ)
    std::vector<double> b;  // b[k-1] multiplies sin(kθ)
    int max_mode() const { return static_cast<int>(a.size()); }
};

FourierCoeffs fourier_analyze(const BoundaryFunction& f, int max_mode);
BoundaryFunction fourier_synthesize(const FourierCoeffs& c, int num_nodes);

/// Spectral d/dθ (order 1) or d²/dθ² (order 2); exact below the Nyquist mode.
BoundaryFunction tangential_derivative(const BoundaryFunction& f, int order);

/// Sample a function of θ at the boundary nodes.
template <typename F>
BoundaryFunction boundary_sample(const Mesh& mesh, F&& f) {
    BoundaryFunction out(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j) out[j] = f(mesh.boundary_theta(j));
    return out;
}

/// Trace of a nodal field on the boundary loop.
BoundaryFunction boundary_trace(const Mesh& mesh, const ScalarField& u);

/// max over {|f|, |f'|, |f''|}; stands in for a C² norm in budget checks.
double c2_proxy_norm(const BoundaryFunction& f);

}  // namespace pmc
