#pragma once

#include <stdexcept>
#include <string>

namespace cavitate {

/// Admissibility gate failed (mu_plus > 1, non-integrable tail, ...).
/// The CLI maps this to exit status 2.
class GateError : public std::runtime_error {
public:
    explicit GateError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver did not converge (root bracket lost, step-size underflow,
/// quadrature stagnation, ...).  The CLI maps this to exit status 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or invalid configuration; message names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cavitate
