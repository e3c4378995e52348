#pragma once

#include <optional>

#include "pmc/boundary.hpp"
#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

/// Boundary derivatives of a solution up to third order in the circle frame
/// (tangential = d/dθ on the unit circle, normal = radial).
struct BoundaryJet {
    BoundaryFunction trace;              // u0 on ∂Ω
    BoundaryFunction tangential;         // ∂_τ u0
    BoundaryFunction normal;             // ∂_ν u0
    BoundaryFunction second_normal;      // ∂²_ν u0
    std::optional<BoundaryFunction> third_normal;  // numeric-grade estimate
};

/// Order ≤ 1 jet from Cauchy data: tangential part spectrally from f0, normal
/// part directly from the measured flux.
BoundaryJet gradient_from_cauchy(const Mesh& mesh, const BoundaryFunction& f0,
                                 const BoundaryFunction& lam_f0);

/// Second normal derivative from the source trace and the first-order jet.
/// Solves the pointwise relation
///   ∂²_ν u (1 + (∂_τ u)²/r²) = H (1+|∇u|²)^{3/2} - (tangential-jet terms)
/// on the circle of radius r (r = 1 on the boundary); the curvature of the
/// circle enters through the 1/r terms.
BoundaryFunction second_normal_jet(const Mesh& mesh, const BoundaryFunction& h_trace,
                                   const BoundaryJet& jet1, double radius = 1.0);

struct ThirdJetOptions {
    double dr = 0.0;     // offset between sampling circles; 0 picks max(4h, 0.04)
    double delta = 0.0;  // radial FD step; 0 picks dr/4
    int max_mode = 16;   // low-pass cutoff for interior circle samples
};

/// One-sided estimate of ∂³_ν u0: evaluates the second-jet relation on the
/// boundary and two interior circles, then differences radially. Numeric
/// grade; the closed-form route stops at order two.
BoundaryFunction third_normal_jet_numeric(const Mesh& mesh, const ScalarField& source,
                                          const ScalarField& u0, const ThirdJetOptions& opts = {});

}  // namespace pmc
