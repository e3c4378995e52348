#include "pmc/boundary.hpp"

#include <cmath>
#include <numbers>

#include "pmc/errors.hpp"

namespace pmc {

FourierCoeffs fourier_analyze(const BoundaryFunction& f, int max_mode) {
    const int m = static_cast<int>(f.size());
    if (m <= 0) throw InvalidArgument("fourier_analyze: empty function");
    const int kmax = std::min(max_mode, m / 2);
    FourierCoeffs c;
    c.a.assign(kmax, 0.0);
    c.b.assign(kmax, 0.0);
    const double w = 2.0 * std::numbers::pi / m;
    double s0 = 0.0;
    for (int j = 0; j < m; ++j) s0 += f[j];
    c.a0 = 2.0 * s0 / m;
    const double mean = 0.5 * c.a0;  // centering keeps the sums well conditioned
    for (int k = 1; k <= kmax; ++k) {
        double sa = 0.0, sb = 0.0;
        for (int j = 0; j < m; ++j) {
            sa += (f[j] - mean) * std::cos(k * w * j);
            sb += (f[j] - mean) * std::sin(k * w * j);
        }
        c.a[k - 1] = 2.0 * sa / m;
        c.b[k - 1] = 2.0 * sb / m;
        if (2 * k == m) c.a[k - 1] *= 0.5;  // Nyquist convention
    }
    return c;
}

BoundaryFunction fourier_synthesize(const FourierCoeffs& c, int num_nodes) {
    BoundaryFunction f(num_nodes);
    const double w = 2.0 * std::numbers::pi / num_nodes;
    for (int j = 0; j < num_nodes; ++j) {
        double v = 0.5 * c.a0;
        for (int k = 1; k <= c.max_mode(); ++k)
            v += c.a[k - 1] * std::cos(k * w * j) + c.b[k - 1] * std::sin(k * w * j);
        f[j] = v;
    }
    return f;
}

BoundaryFunction tangential_derivative(const BoundaryFunction& f, int order) {
    if (order != 1 && order != 2) throw InvalidArgument("tangential_derivative: order must be 1 or 2");
    const int m = static_cast<int>(f.size());
    FourierCoeffs c = fourier_analyze(f, m / 2);
    FourierCoeffs d;
    d.a.assign(c.a.size(), 0.0);
    d.b.assign(c.b.size(), 0.0);
    for (int k = 1; k <= c.max_mode(); ++k) {
        const double ak = c.a[k - 1], bk = c.b[k - 1];
        if (order == 1) {
            // Nyquist sine is invisible on the grid; its derivative is dropped
            if (2 * k == m) continue;
            d.a[k - 1] = k * bk;
            d.b[k - 1] = -k * ak;
        } else {
            d.a[k - 1] = -static_cast<double>(k) * k * ak;
            d.b[k - 1] = -static_cast<double>(k) * k * bk;
        }
    }
    return fourier_synthesize(d, m);
}

BoundaryFunction boundary_trace(const Mesh& mesh, const ScalarField& u) {
    BoundaryFunction f(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j) f[j] = u[mesh.boundary_nodes[j]];
    return f;
}

double c2_proxy_norm(const BoundaryFunction& f) {
    const BoundaryFunction d1 = tangential_derivative(f, 1);
    const BoundaryFunction d2 = tangential_derivative(f, 2);
    double m = 0.0;
    for (int j = 0; j < f.size(); ++j)
        m = std::max({m, std::abs(f[j]), std::abs(d1[j]), std::abs(d2[j])});
    return m;
}

}  // namespace pmc
