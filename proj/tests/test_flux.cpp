#include <doctest.h>

#include <cmath>

#include "pmc/flux.hpp"

using namespace pmc;

namespace {

// independent central-difference differentiator used as the oracle
template <typename F>
auto central_diff(F&& f, const Vec2& p, int dir, double delta = 1e-5) {
    Vec2 e = Vec2::Zero();
    e[dir] = delta;
    return ((f(Vec2(p + e)) - f(Vec2(p - e))) / (2.0 * delta)).eval();
}

}  // namespace

TEST_CASE("flux closed form") {
    CHECK(flux(Vec2(0, 0)).norm() == 0.0);
    const Vec2 f = flux(Vec2(1, 0));
    CHECK(f.x() == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(f.y() == 0.0);
    // |flux| increases monotonically to 1 along a ray
    double prev = 0.0;
    for (double t : {0.5, 1.0, 2.0, 10.0, 100.0}) {
        const double n = flux(Vec2(t, 0)).norm();
        CHECK(n > prev);
        CHECK(n < 1.0);
        prev = n;
    }
    CHECK(prev > 0.9999);
}

TEST_CASE("flux jacobian closed form and FD oracle") {
    CHECK((flux_jacobian(Vec2(0, 0)) - Mat2::Identity()).norm() == 0.0);
    const Mat2 J = flux_jacobian(Vec2(1, 0));
    CHECK(J(0, 0) == doctest::Approx(0.35355339).epsilon(1e-8));
    CHECK(J(1, 1) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(J(0, 1) == 0.0);
    CHECK(J(1, 0) == 0.0);

    for (const Vec2 p : {Vec2(0.3, -0.7), Vec2(1.2, 0.4), Vec2(-2.0, 1.5)}) {
        const Mat2 A = flux_jacobian(p);
        CHECK((A - A.transpose()).norm() < 1e-15);
        for (int d = 0; d < 2; ++d) {
            const Vec2 fd = central_diff([](const Vec2& q) { return flux(q); }, p, d);
            for (int a = 0; a < 2; ++a) CHECK(A(a, d) == doctest::Approx(fd[a]).epsilon(1e-8));
        }
        // ellipticity bounds on the eigenvalues
        const double w2 = 1.0 + p.squaredNorm();
        const Eigen::SelfAdjointEigenSolver<Mat2> eig(A);
        CHECK(eig.eigenvalues().minCoeff() >= std::pow(w2, -1.5) - 1e-12);
        CHECK(eig.eigenvalues().maxCoeff() <= std::pow(w2, -0.5) + 1e-12);
    }
}

TEST_CASE("flux hessian: zero point, frozen value, FD oracle, symmetry") {
    const FluxHessian H0 = flux_hessian(Vec2(0, 0));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) CHECK(H0(a, b, c) == 0.0);

    // -3/(4 sqrt 2) at the (1,1,1) entry for p = (1,0)
    const FluxHessian H1 = flux_hessian(Vec2(1, 0));
    CHECK(H1(0, 0, 0) == doctest::Approx(-0.53033009).epsilon(1e-7));
    const FluxHessian C1 = c_tensor(Vec2(1, 0));
    CHECK(C1(0, 0, 0) == doctest::Approx(-0.53033009).epsilon(1e-7));

    for (const Vec2 p : {Vec2(0.5, 0.2), Vec2(-1.1, 0.8), Vec2(2.0, -0.3)}) {
        const FluxHessian H = flux_hessian(p);
        const FluxHessian C = c_tensor(p);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) {
                    // agreement of the two closed forms
                    CHECK(H(a, b, c) == doctest::Approx(C(a, b, c)).epsilon(1e-12));
                    // full permutation symmetry
                    CHECK(H(a, b, c) == doctest::Approx(H(a, c, b)).epsilon(1e-14));
                    CHECK(H(a, b, c) == doctest::Approx(H(b, a, c)).epsilon(1e-14));
                    CHECK(H(a, b, c) == doctest::Approx(H(c, b, a)).epsilon(1e-14));
                }
        // FD of the jacobian
        for (int c = 0; c < 2; ++c) {
            Vec2 e = Vec2::Zero();
            e[c] = 1e-5;
            const Mat2 fd =
                (flux_jacobian(Vec2(p + e)) - flux_jacobian(Vec2(p - e))) / (2e-5);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    CHECK(H(a, b, c) == doctest::Approx(fd(a, b)).epsilon(1e-7));
        }
    }
}
