#pragma once

#include <stdexcept>
#include <string>

namespace novelty {

// Base of every error raised by the library. Callers that only need a message
// can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values appeared while integrating a transition matrix or state.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

// Dimensions or sample counts do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Time or step index outside the covered span.
class RangeError : public Error {
public:
    using Error::Error;
};

// Gramian condition estimate above the configured cap, or a negative pivot.
class IllConditionedGramian : public Error {
public:
    IllConditionedGramian(const std::string& what, double estimate)
        : Error(what), estimate_(estimate) {}
    double condition_estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

// The problem statement itself is incomplete or violates a precondition.
class SpecificationError : public Error {
public:
    using Error::Error;
};

// The optimum exists but is not unique (objective constant on the feasible set)
// or a multiplier collapsed to zero.
class DegenerateSolution : public Error {
public:
    using Error::Error;
};

// Iterative oracle did not reach its stopping criterion.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double primal_residual, double gap)
        : Error(what), primal_residual_(primal_residual), gap_(gap) {}
    double primal_residual() const noexcept { return primal_residual_; }
    double duality_gap() const noexcept { return gap_; }

private:
    double primal_residual_;
    double gap_;
};

// Random graph generation exhausted its resample budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Bad arguments to a utility (empty sample list, malformed config, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace novelty
