#pragma once

#include <stdexcept>
#include <string>

namespace ksphere {

// Input that violates a documented precondition or type invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical integrator left its domain (non-finite values, norm drift,
// boundary breach). Callers may still hold the partial trajectory.
class IntegrationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver did not reach its tolerance.
class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ksphere
