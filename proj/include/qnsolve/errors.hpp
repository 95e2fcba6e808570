#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnsolve {

/// Raised when an experiment or CLI configuration is invalid (exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation called on an object that is not in a usable state.
class InvalidStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Base for failures of the numerics themselves (exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A denominator of the diagonalized shifted operator fell below the guard.
class SingularShiftError : public NumericalError {
public:
    SingularShiftError(std::array<std::size_t, 3> index, double denominator, long iteration = -1);

    [[nodiscard]] const std::array<std::size_t, 3>& index() const noexcept { return index_; }
    [[nodiscard]] double denominator() const noexcept { return denominator_; }
    [[nodiscard]] long iteration() const noexcept { return iteration_; }

    [[nodiscard]] SingularShiftError at_iteration(long iteration) const {
        return SingularShiftError(index_, denominator_, iteration);
    }

private:
    std::array<std::size_t, 3> index_;
    double denominator_;
    long iteration_;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(long iteration, double residual);

    [[nodiscard]] long iteration() const noexcept { return iteration_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    long iteration_;
    double residual_;
};

/// Non-finite value produced by a nonlinearity callback.
class EvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace qnsolve
