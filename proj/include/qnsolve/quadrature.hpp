#pragma once

#include <Eigen/Dense>

namespace qnsolve {

/// Quadrature rule on the reference interval [-1, 1].
struct QuadratureRule {
    Eigen::VectorXd points;   ///< strictly increasing, endpoints included for Lobatto rules
    Eigen::VectorXd weights;  ///< positive, sum to 2

    [[nodiscard]] Eigen::Index size() const noexcept { return points.size(); }
};

/// Legendre polynomial P_n and its derivative at x, by the three-term recurrence.
struct LegendreValue {
    double value;
    double derivative;
};
[[nodiscard]] LegendreValue legendre(int n, double x);

/// n-point Gauss-Lobatto rule: the endpoints plus the roots of P'_{n-1}.
/// Exact for polynomials of degree <= 2n-3. Throws std::invalid_argument for n < 2.
[[nodiscard]] QuadratureRule gauss_lobatto(int n);

/// Lagrange differentiation matrix on the rule's nodes:
/// D(i, j) = l_j'(x_i), built from barycentric weights.
[[nodiscard]] Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& points);
[[nodiscard]] inline Eigen::MatrixXd diff_matrix(const QuadratureRule& rule) { return diff_matrix(rule.points); }

}  // namespace qnsolve
