#include <doctest.h>

#include <cmath>
#include <random>

#include "pmc/boundary.hpp"
#include "pmc/errors.hpp"

using namespace pmc;

TEST_CASE("tangential derivative is spectrally exact on low modes") {
    const Mesh mesh = generate_disk_mesh(3);
    const BoundaryFunction f = boundary_sample(mesh, [](double th) { return std::sin(th); });
    const BoundaryFunction d = tangential_derivative(f, 1);
    for (int j = 0; j < mesh.num_boundary(); ++j)
        CHECK(d[j] == doctest::Approx(std::cos(mesh.boundary_theta(j))).epsilon(1e-10));

    const BoundaryFunction c = boundary_sample(mesh, [](double) { return 3.7; });
    CHECK(tangential_derivative(c, 1).lpNorm<Eigen::Infinity>() < 1e-12);

    const BoundaryFunction g = boundary_sample(mesh, [](double th) { return std::cos(2 * th); });
    const BoundaryFunction g2 = tangential_derivative(g, 2);
    for (int j = 0; j < mesh.num_boundary(); ++j)
        CHECK(g2[j] == doctest::Approx(-4.0 * std::cos(2 * mesh.boundary_theta(j))).epsilon(1e-10));

    CHECK_THROWS_AS(tangential_derivative(f, 3), InvalidArgument);
    CHECK_THROWS_AS(tangential_derivative(f, 0), InvalidArgument);
}

TEST_CASE("Fourier analysis round-trips") {
    const Mesh mesh = generate_disk_mesh(2);
    const int m = mesh.num_boundary();

    // smooth data: half-spectrum round trip
    const BoundaryFunction smooth = boundary_sample(mesh, [](double th) {
        return 0.3 + std::cos(th) - 0.2 * std::sin(3 * th) + 0.05 * std::cos(5 * th);
    });
    const BoundaryFunction back = fourier_synthesize(fourier_analyze(smooth, m / 2 - 1), m);
    CHECK((back - smooth).lpNorm<Eigen::Infinity>() < 1e-10);

    // arbitrary data: the full spectrum including Nyquist is complete
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    BoundaryFunction noisy(m);
    for (int j = 0; j < m; ++j) noisy[j] = uni(rng);
    const BoundaryFunction back2 = fourier_synthesize(fourier_analyze(noisy, m / 2), m);
    CHECK((back2 - noisy).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("derivative round-trip property: d/dθ of synthesized series") {
    // property-style check over a few random band-limited functions
    const Mesh mesh = generate_disk_mesh(3);
    const int m = mesh.num_boundary();
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        FourierCoeffs c;
        c.a0 = uni(rng);
        const int K = 6;
        for (int k = 1; k <= K; ++k) {
            c.a.push_back(uni(rng));
            c.b.push_back(uni(rng));
        }
        const BoundaryFunction f = fourier_synthesize(c, m);
        const BoundaryFunction d1 = tangential_derivative(f, 1);
        const BoundaryFunction d2 = tangential_derivative(d1, 1);
        const BoundaryFunction d2_direct = tangential_derivative(f, 2);
        CHECK((d2 - d2_direct).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("c2 proxy norm bounds data and two derivatives") {
    const Mesh mesh = generate_disk_mesh(3);
    const BoundaryFunction f = boundary_sample(mesh, [](double th) { return 0.1 * std::cos(3 * th); });
    // |f''| = 0.9 dominates
    CHECK(c2_proxy_norm(f) == doctest::Approx(0.9).epsilon(1e-6));
}
