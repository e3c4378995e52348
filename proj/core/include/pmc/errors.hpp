#pragma once

#include <stdexcept>
#include <string>

namespace pmc {

// Invalid configuration or out-of-budget input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument to an operation (wrong order, mismatched sizes, ...).
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure inside a solver; message carries diagnostics.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pmc
