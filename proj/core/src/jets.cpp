#include "pmc/jets.hpp"

#include <cmath>

#include "pmc/errors.hpp"

namespace pmc {

BoundaryJet gradient_from_cauchy(const Mesh& mesh, const BoundaryFunction& f0,
                                 const BoundaryFunction& lam_f0) {
    if (f0.size() != mesh.num_boundary() || lam_f0.size() != mesh.num_boundary())
        throw InvalidArgument("gradient_from_cauchy: boundary data size mismatch");
    BoundaryJet jet;
    jet.trace = f0;
    jet.tangential = tangential_derivative(f0, 1);
    jet.normal = lam_f0;
    jet.second_normal = BoundaryFunction(mesh.num_boundary());
    return jet;
}

namespace {

BoundaryFunction second_jet_from_samples(const BoundaryFunction& h, const BoundaryFunction& u_r,
                                         const BoundaryFunction& u_t, const BoundaryFunction& u_tt,
                                         const BoundaryFunction& u_rt, double r) {
    const int m = static_cast<int>(h.size());
    BoundaryFunction out(m);
    for (int j = 0; j < m; ++j) {
        const double ur = u_r[j], ut = u_t[j] / r, utt = u_tt[j] / (r * r);
        const double urt = u_rt[j] / r;
        const double grad2 = ur * ur + ut * ut;
        const double w2 = 1.0 + grad2;
        const double rhs = h[j] * w2 * std::sqrt(w2)
                           - (ur / r + utt) * w2
                           + 2.0 * ur * ut * (urt - ut / r)
                           + ut * ut * (utt + ur / r);
        const double factor = 1.0 + ut * ut;  // = (1+|∂_τu|²); always ≥ 1
        out[j] = rhs / factor;
    }
    return out;
}

}  // namespace

BoundaryFunction second_normal_jet(const Mesh& mesh, const BoundaryFunction& h_trace,
                                   const BoundaryJet& jet1, double radius) {
    (void)mesh;
    const BoundaryFunction u_tt = tangential_derivative(jet1.trace, 2);
    const BoundaryFunction u_rt = tangential_derivative(jet1.normal, 1);
    return second_jet_from_samples(h_trace, jet1.normal, jet1.tangential, u_tt, u_rt, radius);
}

BoundaryFunction third_normal_jet_numeric(const Mesh& mesh, const ScalarField& source,
                                          const ScalarField& u0, const ThirdJetOptions& opts) {
    const int m = mesh.num_boundary();
    const double dr = opts.dr > 0.0 ? opts.dr : std::max(4.0 * mesh.h_max, 0.04);
    const double delta = opts.delta > 0.0 ? opts.delta : 0.25 * dr;

    // interpolated circle samples carry mesh-frequency noise that spectral
    // differentiation would amplify quadratically; keep only the low modes
    auto circle_samples = [&](double r, const ScalarField& f) {
        BoundaryFunction s(m);
        for (int j = 0; j < m; ++j) {
            const double th = mesh.boundary_theta(j);
            s[j] = mesh.eval(f, Vec2(r * std::cos(th), r * std::sin(th)));
        }
        return fourier_synthesize(fourier_analyze(s, opts.max_mode), m);
    };

    // second normal derivative on three circles via the jet relation
    std::array<BoundaryFunction, 3> d2;
    for (int k = 0; k < 3; ++k) {
        const double r = 1.0 - k * dr;
        const BoundaryFunction u_here = circle_samples(r, u0);
        BoundaryFunction u_r(m);
        if (k == 0) {
            // one-sided: circle r+delta leaves the mesh
            const BoundaryFunction um1 = circle_samples(r - delta, u0);
            const BoundaryFunction um2 = circle_samples(r - 2.0 * delta, u0);
            u_r = (3.0 * u_here - 4.0 * um1 + um2) / (2.0 * delta);
        } else {
            const BoundaryFunction up = circle_samples(r + delta, u0);
            const BoundaryFunction um = circle_samples(r - delta, u0);
            u_r = (up - um) / (2.0 * delta);
        }
        const BoundaryFunction u_t = tangential_derivative(u_here, 1);
        const BoundaryFunction u_tt = tangential_derivative(u_here, 2);
        const BoundaryFunction u_rt = tangential_derivative(u_r, 1);
        const BoundaryFunction h_here = circle_samples(r, source);
        d2[k] = second_jet_from_samples(h_here, u_r, u_t, u_tt, u_rt, r);
    }
    return BoundaryFunction((3.0 * d2[0] - 4.0 * d2[1] + d2[2]) / (2.0 * dr));
}

}  // namespace pmc
