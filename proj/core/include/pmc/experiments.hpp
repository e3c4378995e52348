#pragma once

#include <string>
#include <vector>

#include "pmc/config.hpp"

namespace pmc {

struct CheckLine {
    std::string name;
    double measured = 0.0;
    std::string target;  // human-readable, e.g. ">= 1.8" or "<= 1e-12"
    bool pass = false;
    bool soft = false;   // reported, not gating
};

struct ExperimentResult {
    std::string name;
    std::vector<CheckLine> checks;
    std::vector<std::string> files;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.soft && !c.pass) return false;
        return true;
    }
};

const std::vector<std::string>& experiment_names();

/// Run one named experiment; writes CSV artifacts and a summary under
/// <out_dir>/<name>/ and returns the measured checks. Throws ConfigError for
/// an unknown name.
ExperimentResult run_experiment(const Config& cfg, const std::string& name);

std::string summary_text(const ExperimentResult& result);

}  // namespace pmc
