#include "pmc/inverse.hpp"

#include <cmath>
#include <random>

#include "pmc/errors.hpp"
#include "pmc/flux.hpp"

namespace pmc {

DNDataset forward_data(const Mesh& mesh, const ScalarField& source, const BoundaryFunction& f0,
                       const std::vector<BoundaryFunction>& directions, double amplitude,
                       const ForwardOptions& opts) {
    DNDataset data;
    data.mesh_level = mesh.level;
    data.f0 = f0;
    data.h_trace = boundary_trace(mesh, source);
    data.pairs.push_back(dn_apply(mesh, source, f0, opts));
    for (const auto& dir : directions)
        data.pairs.push_back(dn_apply(mesh, source, BoundaryFunction(f0 + amplitude * dir), opts));
    return data;
}

std::vector<BoundaryFunction> fourier_directions(const Mesh& mesh, int max_mode) {
    std::vector<BoundaryFunction> dirs;
    for (int k = 1; k <= max_mode; ++k) {
        dirs.push_back(boundary_sample(mesh, [k](double th) { return std::cos(k * th); }));
        dirs.push_back(boundary_sample(mesh, [k](double th) { return std::sin(k * th); }));
    }
    return dirs;
}

SourceSensitivity::SourceSensitivity(const Mesh& mesh, const ScalarField& source,
                                     const BoundaryFunction& f, const ForwardOptions& opts)
    : mesh_(&mesh), bmass_(mesh), Mb_(boundary_mass(mesh)) {
    const ScalarField u = solve_pmc(mesh, source, f, opts).first;
    const GradientField g = gradient(mesh, u);
    std::vector<Mat2> coef(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) coef[t] = flux_jacobian(g[t]);
    K_ = assemble_stiffness(mesh, coef);
    M_ = assemble_mass(mesh);
    solver_ = std::make_unique<DirichletSolver>(mesh, K_);
    const NonlinearTrace base = neumann_trace(mesh, u, source);
    nc_.resize(mesh.num_boundary());
    for (int j = 0; j < mesh.num_boundary(); ++j)
        nc_[j] = TraceConversion::d_c(std::clamp(base.conormal[j], -1.0 + 1e-14, 1.0 - 1e-14),
                                      base.tangential[j]);
    data_ = base.normal_derivative;
}

BoundaryFunction SourceSensitivity::apply(const ScalarField& delta_source) const {
    const Eigen::VectorXd Md = M_ * delta_source;
    const ScalarField du = solver_->solve_zero_boundary((-Md).eval());
    const BoundaryFunction dc = bmass_.solve(boundary_rows(*mesh_, K_ * du + Md));
    BoundaryFunction out(mesh_->num_boundary());
    for (int j = 0; j < mesh_->num_boundary(); ++j) out[j] = nc_[j] * dc[j];
    return out;
}

ScalarField SourceSensitivity::adjoint(const BoundaryFunction& b) const {
    // z = Bᵀ Mb^{-1} D Mb b, then adj = z - solve(K z) on the interior
    const BoundaryFunction v1 = BoundaryFunction((Mb_ * b).eval());
    BoundaryFunction v2(mesh_->num_boundary());
    for (int j = 0; j < mesh_->num_boundary(); ++j) v2[j] = nc_[j] * v1[j];
    const BoundaryFunction zb = bmass_.solve(v2);
    const Eigen::VectorXd z = scatter_boundary(*mesh_, zb);
    const ScalarField p = solver_->solve_zero_boundary((K_ * z).eval());
    return ScalarField(z - p);
}

namespace {

struct GNWorkspace {
    std::vector<std::unique_ptr<SourceSensitivity>> sens;
    std::vector<BoundaryFunction> residuals;
    double misfit = 0.0;
};

GNWorkspace evaluate(const Mesh& mesh, const DNDataset& data, const ScalarField& H,
                     const InverseOptions& opts) {
    GNWorkspace ws;
    for (const auto& pair : data.pairs) {
        ws.sens.push_back(
            std::make_unique<SourceSensitivity>(mesh, H, pair.dirichlet, opts.forward));
        BoundaryFunction r = BoundaryFunction(ws.sens.back()->data() - pair.neumann);
        const double n = boundary_l2_norm(mesh, r);
        ws.misfit += 0.5 * n * n;
        ws.residuals.push_back(std::move(r));
    }
    return ws;
}

}  // namespace

ReconstructionResult gauss_newton_reconstruct(const Mesh& mesh, const DNDataset& data,
                                              const BoundaryFunction& h_boundary, double reg,
                                              const InverseOptions& opts,
                                              const std::optional<ScalarField>& truth) {
    if (!(reg > 0.0)) throw InvalidArgument("gauss_newton_reconstruct: reg must be positive");
    const SpMat K0 = assemble_stiffness(mesh);
    const SpMat M = assemble_mass(mesh);
    const int ni = mesh.num_interior();

    ScalarField H = harmonic_extension(mesh, h_boundary);
    auto interior = [&](const Eigen::VectorXd& full) {
        Eigen::VectorXd x(ni);
        for (int i = 0; i < ni; ++i) x[i] = full[mesh.interior_nodes[i]];
        return x;
    };
    auto expand = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh.num_nodes());
        for (int i = 0; i < ni; ++i) full[mesh.interior_nodes[i]] = x[i];
        return full;
    };

    ReconstructionResult result;
    result.regularization = reg;
    GNWorkspace ws = evaluate(mesh, data, H, opts);
    double objective = ws.misfit + 0.5 * reg * H.dot(K0 * H);
    result.misfit.push_back(ws.misfit);
    double g0 = -1.0;

    for (int it = 0; it < opts.max_gn_iterations; ++it) {
        result.iterations = it;
        // gradient of the objective in the interior dofs
        Eigen::VectorXd grad = reg * interior(K0 * H);
        for (size_t i = 0; i < ws.sens.size(); ++i)
            grad += interior(M * ws.sens[i]->adjoint(ws.residuals[i]));
        const double gnorm = grad.norm();
        if (g0 < 0.0) g0 = gnorm;
        if (gnorm <= opts.gradient_tol * std::max(1.0, g0)) {
            result.converged = true;
            break;
        }

        // Gauss-Newton step by CG on (Σ JᵀMbJ + reg K0) Δ = -grad
        auto normal_apply = [&](const Eigen::VectorXd& x) {
            const ScalarField dx = ScalarField(expand(x));
            Eigen::VectorXd out = reg * interior(K0 * expand(x));
            for (const auto& s : ws.sens) {
                const BoundaryFunction y = s->apply(dx);
                out += interior(M * s->adjoint(y));
            }
            return out;
        };
        Eigen::VectorXd x = Eigen::VectorXd::Zero(ni);
        Eigen::VectorXd r = -grad;
        Eigen::VectorXd p = r;
        double rr = r.squaredNorm();
        const double rr0 = rr;
        for (int k = 0; k < opts.cg_iterations && rr > opts.cg_tol * opts.cg_tol * rr0; ++k) {
            const Eigen::VectorXd Ap = normal_apply(p);
            const double alpha = rr / p.dot(Ap);
            x += alpha * p;
            r -= alpha * Ap;
            const double rr_new = r.squaredNorm();
            p = r + (rr_new / rr) * p;
            rr = rr_new;
        }

        // backtracking on the regularized objective
        double step = 1.0;
        bool accepted = false;
        while (step > 1e-3) {
            const ScalarField H_trial = ScalarField(H + expand(step * x));
            GNWorkspace ws_trial = evaluate(mesh, data, H_trial, opts);
            const double obj_trial = ws_trial.misfit + 0.5 * reg * H_trial.dot(K0 * H_trial);
            if (obj_trial < objective) {
                H = H_trial;
                ws = std::move(ws_trial);
                objective = obj_trial;
                result.misfit.push_back(ws.misfit);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.stagnated = true;
            break;
        }
    }

    result.source = H;
    if (truth) result.relative_error = interior_relative_error(mesh, H, *truth, opts.interior_radius);
    return result;
}

UniquenessReport uniqueness_probe(const Mesh& mesh, const ScalarField& h1, const ScalarField& h2,
                                  const BoundaryFunction& f0,
                                  const std::vector<BoundaryFunction>& directions,
                                  double amplitude, const ForwardOptions& opts) {
    const BoundaryFunction t1 = boundary_trace(mesh, h1), t2 = boundary_trace(mesh, h2);
    if ((t1 - t2).lpNorm<Eigen::Infinity>() > 1e-10)
        throw InvalidArgument("uniqueness_probe: sources must share their boundary trace");
    UniquenessReport rep;
    auto gap_for = [&](const BoundaryFunction& f) {
        const CauchyDataPair p1 = dn_apply(mesh, h1, f, opts);
        const CauchyDataPair p2 = dn_apply(mesh, h2, f, opts);
        return boundary_l2_norm(mesh, BoundaryFunction(p1.neumann - p2.neumann));
    };
    rep.dn_gap = gap_for(f0);
    for (const auto& dir : directions)
        rep.dn_gap = std::max(rep.dn_gap, gap_for(BoundaryFunction(f0 + amplitude * dir)));
    rep.source_gap = l2_norm(mesh, ScalarField(h1 - h2));
    return rep;
}

DNDataset add_noise(const DNDataset& data, double sigma, unsigned long long seed) {
    DNDataset out = data;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& pair : out.pairs)
        for (int j = 0; j < pair.neumann.size(); ++j) pair.neumann[j] += gauss(rng);
    return out;
}

double morozov_select(const Mesh& mesh, const DNDataset& data, const BoundaryFunction& h_boundary,
                      double noise_energy, const std::vector<double>& reg_grid,
                      const InverseOptions& opts) {
    std::vector<double> regs = reg_grid;
    std::sort(regs.begin(), regs.end());
    for (double reg : regs) {
        const ReconstructionResult r = gauss_newton_reconstruct(mesh, data, h_boundary, reg, opts);
        if (!r.misfit.empty() && r.misfit.back() >= noise_energy) return reg;
    }
    return regs.back();
}

double interior_relative_error(const Mesh& mesh, const ScalarField& estimate,
                               const ScalarField& truth, double radius) {
    double num = 0.0, den = 0.0;
    const Eigen::VectorXd mass = lumped_mass(mesh);
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        if (mesh.nodes[i].norm() > radius) continue;
        const double d = estimate[i] - truth[i];
        num += mass[i] * d * d;
        den += mass[i] * truth[i] * truth[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace pmc
