#include "qnsolve/errors.hpp"

#include <sstream>

namespace qnsolve {

namespace {

std::string singular_message(const std::array<std::size_t, 3>& index, double denominator, long iteration) {
    std::ostringstream os;
    os << "singular shift: denominator " << denominator << " at index (" << index[0] << ',' << index[1] << ','
       << index[2] << ')';
    if (iteration >= 0) os << " in iteration " << iteration;
    return os.str();
}

std::string divergence_message(long iteration, double residual) {
    std::ostringstream os;
    os << "iteration diverged: residual " << residual << " at iteration " << iteration;
    return os.str();
}

}  // namespace

SingularShiftError::SingularShiftError(std::array<std::size_t, 3> index, double denominator, long iteration)
    : NumericalError(singular_message(index, denominator, iteration)),
      index_(index),
      denominator_(denominator),
      iteration_(iteration) {}

DivergenceError::DivergenceError(long iteration, double residual)
    : NumericalError(divergence_message(iteration, residual)), iteration_(iteration), residual_(residual) {}

}  // namespace qnsolve
