#include <doctest.h>

#include <cmath>

#include "pmc/dn_map.hpp"
#include "pmc/jets.hpp"

using namespace pmc;

namespace {

// radial reference u = alpha ((1-r²)/4 + (1-r²)²/8)
struct Radial {
    double alpha;
    double value(double r) const {
        const double b = 1.0 - r * r;
        return alpha * (b / 4.0 + b * b / 8.0);
    }
    double u_r(double r) const { return -alpha * r * (2.0 - r * r) / 2.0; }
    double u_rr(double r) const { return -alpha * (2.0 - 3.0 * r * r) / 2.0; }
    double u_rrr(double r) const { return 3.0 * alpha * r; }
    double source(double r) const {
        const double d = 1e-6;
        auto q = [this](double s) { return s * u_r(s) / std::sqrt(1.0 + u_r(s) * u_r(s)); };
        if (r < d) return 2.0 * u_rr(0.0);
        return (q(r + d) - q(r - d)) / (2.0 * d) / r;
    }
};

}  // namespace

TEST_CASE("order-1 jet from Cauchy data") {
    const Mesh mesh = generate_disk_mesh(3);
    const BoundaryFunction zero(mesh.num_boundary());
    const BoundaryJet jz = gradient_from_cauchy(mesh, zero, zero);
    CHECK(jz.tangential.lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(jz.normal.lpNorm<Eigen::Infinity>() < 1e-14);

    // u = x: trace cos θ, normal derivative cos θ, tangential -sin θ; the
    // cartesian gradient reassembled from the frame is (1, 0)
    const BoundaryFunction fx = boundary_sample(mesh, [](double th) { return std::cos(th); });
    const BoundaryJet jx = gradient_from_cauchy(mesh, fx, fx);
    const BoundaryFrame frame = boundary_frame(mesh);
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        const Vec2 grad = jx.normal[j] * frame.normal[j] + jx.tangential[j] * frame.tangent[j];
        CHECK((grad - Vec2(1, 0)).norm() < 1e-9);
    }
}

TEST_CASE("second jet: zero case and exact-data algebra") {
    const Mesh mesh = generate_disk_mesh(4);
    const BoundaryFunction zero(mesh.num_boundary());
    const BoundaryFunction d2z =
        second_normal_jet(mesh, zero, gradient_from_cauchy(mesh, zero, zero));
    CHECK(d2z.lpNorm<Eigen::Infinity>() == 0.0);

    const Radial state{0.2};
    const BoundaryFunction f0 = boundary_sample(mesh, [&](double) { return state.value(1.0); });
    const BoundaryFunction lam = boundary_sample(mesh, [&](double) { return state.u_r(1.0); });
    const BoundaryFunction ht = boundary_sample(mesh, [&](double) { return state.source(1.0); });
    const BoundaryFunction d2 = second_normal_jet(mesh, ht, gradient_from_cauchy(mesh, f0, lam));
    for (int j = 0; j < mesh.num_boundary(); ++j)
        CHECK(d2[j] == doctest::Approx(state.u_rr(1.0)).epsilon(1e-8));
}

TEST_CASE("second jet against a nonradial closed form") {
    // u = x²y/5 + sin(x)/7 on the boundary circle; all jet inputs evaluated
    // from the closed form, the relation must return ∂²_r u exactly
    const Mesh mesh = generate_disk_mesh(4);
    auto u = [](double x, double y) { return x * x * y / 5.0 + std::sin(x) / 7.0; };
    const double d = 1e-6;
    auto ux = [&](double x, double y) { return (u(x + d, y) - u(x - d, y)) / (2 * d); };
    auto uy = [&](double x, double y) { return (u(x, y + d) - u(x, y - d)) / (2 * d); };
    auto source = [&](double x, double y) {
        auto Fx = [&](double a, double b) {
            const double gx = ux(a, b), gy = uy(a, b);
            return gx / std::sqrt(1 + gx * gx + gy * gy);
        };
        auto Fy = [&](double a, double b) {
            const double gx = ux(a, b), gy = uy(a, b);
            return gy / std::sqrt(1 + gx * gx + gy * gy);
        };
        return (Fx(x + d, y) - Fx(x - d, y)) / (2 * d) + (Fy(x, y + d) - Fy(x, y - d)) / (2 * d);
    };

    BoundaryFunction f0(mesh.num_boundary()), lam(mesh.num_boundary()), ht(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        const double th = mesh.boundary_theta(j);
        const double x = std::cos(th), y = std::sin(th);
        f0[j] = u(x, y);
        lam[j] = ux(x, y) * x + uy(x, y) * y;  // radial derivative on the circle
        ht[j] = source(x, y);
    }
    const BoundaryFunction d2 = second_normal_jet(mesh, ht, gradient_from_cauchy(mesh, f0, lam));
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        const double th = mesh.boundary_theta(j);
        // ∂²_r u along the ray
        const double dr = 1e-4;
        auto ur = [&](double r) { return u(r * std::cos(th), r * std::sin(th)); };
        const double exact = (ur(1 + dr) - 2 * ur(1) + ur(1 - dr)) / (dr * dr);
        CHECK(d2[j] == doctest::Approx(exact).epsilon(5e-5));
    }
}

TEST_CASE("second jet is affine in the source trace (superposition)") {
    const Mesh mesh = generate_disk_mesh(3);
    const Radial state{0.2};
    const BoundaryFunction f0 = boundary_sample(mesh, [&](double) { return state.value(1.0); });
    const BoundaryFunction lam = boundary_sample(mesh, [&](double) { return state.u_r(1.0); });
    const BoundaryJet jet = gradient_from_cauchy(mesh, f0, lam);
    const BoundaryFunction h1 = boundary_sample(mesh, [](double th) { return std::cos(th); });
    const BoundaryFunction h2 = boundary_sample(mesh, [](double th) { return 0.3 * std::sin(th); });
    const BoundaryFunction zero(mesh.num_boundary());

    const BoundaryFunction a = second_normal_jet(mesh, h1, jet);
    const BoundaryFunction b = second_normal_jet(mesh, h2, jet);
    const BoundaryFunction base = second_normal_jet(mesh, zero, jet);
    const BoundaryFunction sum = second_normal_jet(mesh, BoundaryFunction(h1 + h2), jet);
    CHECK((sum - (a + b - base)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("division factor stays in (0, 1]") {
    const Mesh mesh = generate_disk_mesh(3);
    // the factor in frame form is (1+u_τ²)/(1+|∇u|²) ∈ (0,1]
    const BoundaryFunction f = boundary_sample(mesh, [](double th) { return 0.3 * std::cos(2 * th); });
    const BoundaryFunction lam = boundary_sample(mesh, [](double th) { return 0.2 * std::sin(th); });
    const BoundaryJet jet = gradient_from_cauchy(mesh, f, lam);
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        const double ut = jet.tangential[j], un = jet.normal[j];
        const double factor = (1.0 + ut * ut) / (1.0 + ut * ut + un * un);
        CHECK(factor > 0.0);
        CHECK(factor <= 1.0);
    }
}

TEST_CASE("solver-data jet recovery converges") {
    const Radial state{0.2};
    std::vector<double> errs;
    for (int level : {3, 4}) {
        const Mesh mesh = generate_disk_mesh(level);
        ScalarField u(mesh.num_nodes()), H(mesh.num_nodes());
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            const double r = mesh.nodes[i].norm();
            u[i] = state.value(r);
            H[i] = state.source(r);
        }
        const auto [uh, rep] = solve_pmc(mesh, H, boundary_trace(mesh, u));
        REQUIRE(rep.converged);
        const NonlinearTrace tr = neumann_trace(mesh, uh, H);
        const BoundaryJet jet =
            gradient_from_cauchy(mesh, boundary_trace(mesh, uh), tr.normal_derivative);
        const BoundaryFunction d2 = second_normal_jet(mesh, boundary_trace(mesh, H), jet);
        double err = 0.0;
        for (int j = 0; j < mesh.num_boundary(); ++j)
            err = std::max(err, std::abs(d2[j] - state.u_rr(1.0)));
        errs.push_back(err);
    }
    CHECK(errs[1] < 0.6 * errs[0]);
}

TEST_CASE("third jet: affine field gives zero, radial field matches, stencil sweep converges") {
    const Mesh mesh = generate_disk_mesh(5);

    ScalarField affine(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i)
        affine[i] = 0.2 * mesh.nodes[i].x() - 0.1 * mesh.nodes[i].y();
    const ScalarField zero(mesh.num_nodes());
    const BoundaryFunction d3a = third_normal_jet_numeric(mesh, zero, affine);
    CHECK(d3a.lpNorm<Eigen::Infinity>() < 1e-5);

    const Radial state{0.2};
    ScalarField u(mesh.num_nodes()), H(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        const double r = mesh.nodes[i].norm();
        u[i] = state.value(r);
        H[i] = state.source(r);
    }
    const BoundaryFunction d3 = third_normal_jet_numeric(mesh, H, u);
    const double truth = state.u_rrr(1.0);
    double err = 0.0;
    for (int j = 0; j < mesh.num_boundary(); ++j) err = std::max(err, std::abs(d3[j] - truth));
    CHECK(err / std::abs(truth) <= 0.05);

    // self-convergence needs a state whose second jet is not polynomial of
    // low degree in r; add a cubic bump so the stencil truncation shows
    ScalarField u5(mesh.num_nodes()), H5(mesh.num_nodes());
    const double a5 = 0.2;
    auto u_r5 = [&](double r) {
        return a5 * (-r * (2.0 - r * r) / 2.0 + (-r + 2.0 * r * r * r - std::pow(r, 5)));
    };
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        const double r = mesh.nodes[i].norm();
        const double b = 1.0 - r * r;
        u5[i] = a5 * (b / 4.0 + b * b / 8.0 + b * b * b / 6.0);
        auto q = [&](double s) { return s * u_r5(s) / std::sqrt(1 + u_r5(s) * u_r5(s)); };
        const double d = 1e-6;
        H5[i] = r < d ? 2.0 * a5 * (-1.0 - 1.0) : (q(r + d) - q(r - d)) / (2.0 * d) / r;
    }
    const double truth5 = a5 * (3.0 - 8.0);  // u_rrr(1)
    ThirdJetOptions wide;
    wide.dr = 0.3;
    ThirdJetOptions narrow;
    narrow.dr = 0.1;
    const BoundaryFunction dw = third_normal_jet_numeric(mesh, H5, u5, wide);
    const BoundaryFunction dn = third_normal_jet_numeric(mesh, H5, u5, narrow);
    double ew = 0.0, en = 0.0;
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        ew = std::max(ew, std::abs(dw[j] - truth5));
        en = std::max(en, std::abs(dn[j] - truth5));
    }
    CHECK(en < ew);
}
