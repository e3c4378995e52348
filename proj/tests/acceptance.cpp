// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// hard failure. Soft (report-only) lines are marked and never gate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pmc/config.hpp"
#include "pmc/experiments.hpp"
#include "pmc/io.hpp"

namespace {

struct Criterion {
    std::string label;
    bool pass = true;
    bool soft = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void collect(Criterion& crit, const pmc::ExperimentResult& res,
             const std::vector<std::string>& names) {
    for (const auto& name : names) {
        for (const auto& c : res.checks) {
            if (c.name != name) continue;
            if (!c.soft && !c.pass) crit.pass = false;
            if (!crit.detail.empty()) crit.detail += "; ";
            crit.detail += c.name + " = " + fmt(c.measured) + " (" + c.target +
                           (c.pass ? "" : c.soft ? ", missed" : ", FAILED") + ")";
        }
    }
}

}  // namespace

int main() {
    namespace fs = std::filesystem;
    pmc::Config cfg;
    cfg.out_dir = (fs::temp_directory_path() / "pmc_acceptance").string();
    fs::remove_all(cfg.out_dir);

    std::vector<Criterion> criteria;
    try {
        const pmc::ExperimentResult fwd = pmc::run_experiment(cfg, "forward-convergence");
        const pmc::ExperimentResult ident = pmc::run_experiment(cfg, "identity-check");
        const pmc::ExperimentResult dn = pmc::run_experiment(cfg, "dn-consistency");
        const pmc::ExperimentResult schr = pmc::run_experiment(cfg, "schrodinger-equivalence");
        const pmc::ExperimentResult gauge = pmc::run_experiment(cfg, "gauge-invariance");
        const pmc::ExperimentResult jets = pmc::run_experiment(cfg, "jet-recovery");
        const pmc::ExperimentResult cgo = pmc::run_experiment(cfg, "cgo-decay");
        const pmc::ExperimentResult sp = pmc::run_experiment(cfg, "stationary-phase");

        pmc::Config inv_cfg = cfg;
        inv_cfg.mesh_level = 5;  // reconstruction benchmark runs one level up
        const pmc::ExperimentResult inv = pmc::run_experiment(inv_cfg, "invert");

        {
            Criterion c{"1. forward correctness (order, affine exactness, runtime)"};
            collect(c, fwd, {"l2_convergence_order", "affine_exactness", "runtime_seconds"});
            criteria.push_back(c);
        }
        {
            Criterion c{"2. algebraic identities at machine precision"};
            collect(c, ident,
                    {"det_identity", "gamma_identity", "c_tensor_symmetry", "c_tensor_two_forms"});
            criteria.push_back(c);
        }
        {
            Criterion c{"3. first-linearization consistency (slope, disk symbol)"};
            collect(c, dn, {"first_fd_slope", "laplace_symbol_max_rel_error"});
            criteria.push_back(c);
        }
        {
            Criterion c{"4. schrodinger equivalence residual slope"};
            collect(c, schr, {"schrodinger_residual_slope"});
            criteria.push_back(c);
        }
        {
            Criterion c{"5. second-linearization consistency (slope, symmetry, pairing)"};
            collect(c, dn,
                    {"second_fd_slope", "second_fd_symmetry", "int_by_parts_slope",
                     "int_by_parts_variational_rel"});
            criteria.push_back(c);
        }
        {
            Criterion c{"6. gauge transformation law (DN match, determinant identity)"};
            collect(c, gauge,
                    {"dn_rel_diff_fine", "dn_diff_refinement_ratio",
                     "det_transformation_identity", "lambda_j_identity"});
            criteria.push_back(c);
        }
        {
            Criterion c{"7. boundary-jet recovery"};
            collect(c, jets,
                    {"second_jet_exact_data_error", "second_jet_solver_slope", "zero_case"});
            criteria.push_back(c);
        }
        {
            Criterion c{"8. CGO remainder decay slopes"};
            collect(c, cgo,
                    {"min_slope_critical_point", "min_slope_no_critical_point",
                     "zero_potential_remainder", "runtime_seconds"});
            criteria.push_back(c);
        }
        {
            Criterion c{"9. stationary-phase localization"};
            collect(c, sp, {"localization_rel_error"});
            criteria.push_back(c);
        }
        {
            Criterion c{"10. inverse reconstruction (adjoint, recovery, trivial gauge)"};
            collect(c, inv,
                    {"adjoint_identity_rel", "recovery_rel_error_interior",
                     "trivial_gauge_discrepancy"});
            c.soft = false;  // adjoint and gauge checks gate; recovery line is soft
            criteria.push_back(c);
        }
        {
            Criterion c{"11. determinism: rerun is byte-identical"};
            pmc::Config da = cfg, db = cfg;
            da.out_dir = cfg.out_dir + "/det_a";
            db.out_dir = cfg.out_dir + "/det_b";
            pmc::run_experiment(da, "identity-check");
            pmc::run_experiment(db, "identity-check");
            pmc::run_experiment(da, "forward-convergence");
            pmc::run_experiment(db, "forward-convergence");
            bool same = true;
            for (const std::string rel : {"identity-check/identities.csv",
                                          "forward-convergence/convergence.csv"}) {
                const std::string a = pmc::read_file(da.out_dir + "/" + rel);
                const std::string b = pmc::read_file(db.out_dir + "/" + rel);
                if (a != b) same = false;
            }
            // runtime lines differ by nature; compare only the data artifacts
            c.pass = same;
            c.detail = same ? "artifacts byte-identical" : "artifact mismatch";
            criteria.push_back(c);
        }
    } catch (const std::exception& e) {
        std::cerr << "acceptance: aborted: " << e.what() << "\n";
        return 64;
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!c.pass) ++failures;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.label;
        if (!c.detail.empty()) std::cout << "\n       " << c.detail;
        std::cout << "\n";
    }
    std::cout << (failures == 0 ? "acceptance: all criteria passed\n"
                                : "acceptance: " + std::to_string(failures) + " criteria failed\n");
    return failures == 0 ? 0 : 1;
}
