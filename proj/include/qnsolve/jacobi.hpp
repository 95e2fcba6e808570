#pragma once

#include <Eigen/Dense>

namespace qnsolve {

struct SymmetricEigenResult {
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< orthonormal columns, permuted to match values
    int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Stops once the off-diagonal Frobenius
/// norm drops below rel_tol * ||A||_F (or a full sweep rotates nothing).
/// Throws std::invalid_argument for non-square input and NumericalError on non-convergence.
[[nodiscard]] SymmetricEigenResult jacobi_eigen(const Eigen::MatrixXd& a, double rel_tol = 1e-13,
                                                int max_sweeps = 100);

/// Same contract as jacobi_eigen. A centrosymmetric input (A(i,j) = A(n-1-i, n-1-j), as produced by
/// uniform meshes with mirror-symmetric boundary kinds) is first split into its even and odd
/// blocks, which cuts the rotation work by about four.
[[nodiscard]] SymmetricEigenResult jacobi_eigen_split(const Eigen::MatrixXd& a, double rel_tol = 1e-13,
                                                      int max_sweeps = 100);

}  // namespace qnsolve
