#pragma once

#include <array>
#include <cmath>

#include "pmc/types.hpp"

namespace pmc {

/// Nonlinear flux F(p) = p / (1+|p|²)^{1/2}; |F| < 1 for finite p.
inline Vec2 flux(const Vec2& p) {
    return p / std::sqrt(1.0 + p.squaredNorm());
}

/// dF/dp, a symmetric positive definite 2x2 matrix with eigenvalues in
/// [(1+|p|²)^{-3/2}, (1+|p|²)^{-1/2}].
inline Mat2 flux_jacobian(const Vec2& p) {
    const double w2 = 1.0 + p.squaredNorm();
    const double w = std::sqrt(w2);
    return Mat2::Identity() / w - (p * p.transpose()) / (w2 * w);
}

/// Fully symmetric third-derivative array d²F^a/dp_b dp_c.
struct FluxHessian {
    std::array<double, 8> v{};  // index a*4 + b*2 + c
    double& operator()(int a, int b, int c) { return v[static_cast<size_t>(a * 4 + b * 2 + c)]; }
    double operator()(int a, int b, int c) const { return v[static_cast<size_t>(a * 4 + b * 2 + c)]; }

    /// Contraction C[x, y]^a = Σ_{b,c} C^{abc} x_c y_b.
    Vec2 contract(const Vec2& x, const Vec2& y) const {
        Vec2 out = Vec2::Zero();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) out[a] += (*this)(a, b, c) * x[c] * y[b];
        return out;
    }
};

/// General closed form of d²F at any p.
inline FluxHessian flux_hessian(const Vec2& p) {
    const double w2 = 1.0 + p.squaredNorm();
    const double w32 = w2 * std::sqrt(w2);
    FluxHessian H;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                const double dab = (a == b) ? 1.0 : 0.0;
                const double dac = (a == c) ? 1.0 : 0.0;
                const double dbc = (b == c) ? 1.0 : 0.0;
                H(a, b, c) = -p[c] / w32 * (dab - p[a] * p[b] / w2)
                             - p[b] / w32 * (dac - p[a] * p[c] / w2)
                             - p[a] / w32 * (dbc - p[b] * p[c] / w2);
            }
    return H;
}

/// Equivalent contracted form -(p_a g^{bc} + p_b g^{ac} + p_c g^{ab})/(1+|p|²)
/// with g = flux_jacobian(p); must agree with flux_hessian to roundoff.
inline FluxHessian c_tensor(const Vec2& p) {
    const double w2 = 1.0 + p.squaredNorm();
    const Mat2 g = flux_jacobian(p);
    FluxHessian H;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                H(a, b, c) = -(p[a] * g(b, c) + p[b] * g(a, c) + p[c] * g(a, b)) / w2;
    return H;
}

}  // namespace pmc
