#pragma once

#include <stdexcept>
#include <string>

namespace dp4 {

// Bad q, bad point configuration, mismatched truncations.  CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// Caller violated an operation precondition (non-nef class, vanishing section, ...).
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& m) : std::runtime_error(m) {}
};

// An enumeration or lattice closure exceeded its configured budget.  CLI exit code 3.
struct ResourceCapError : std::runtime_error {
    explicit ResourceCapError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace dp4
