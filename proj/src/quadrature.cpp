#include "qnsolve/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qnsolve {

LegendreValue legendre(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    double p_prev = 1.0;
    double p = x;
    double dp_prev = 0.0;
    double dp = 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        const double dp_next = dp_prev + (2.0 * k - 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    return {p, dp};
}

QuadratureRule gauss_lobatto(int n) {
    if (n < 2) throw std::invalid_argument("gauss_lobatto: need at least 2 points, got " + std::to_string(n));

    const int degree = n - 1;
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    rule.points(0) = -1.0;
    rule.points(n - 1) = 1.0;

    // Interior nodes are the roots of P'_degree. Newton on P'_degree, using the
    // Legendre ODE for the second derivative, seeded by Chebyshev-Lobatto points.
    const double nn1 = degree * (degree + 1.0);
    for (int j = 1; j <= (n - 2 + 1) / 2; ++j) {
        double x = -std::cos(std::numbers::pi * j / degree);
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(degree, x);
            const double d2p = (2.0 * x * dp - nn1 * p) / (1.0 - x * x);
            const double step = dp / d2p;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        rule.points(j) = x;
        rule.points(n - 1 - j) = -x;
    }
    if (n % 2 == 1) rule.points(n / 2) = 0.0;

    for (int i = 0; i < n; ++i) {
        const double p = legendre(degree, rule.points(i)).value;
        rule.weights(i) = 2.0 / (n * (n - 1.0) * p * p);
    }
    return rule;
}

Eigen::MatrixXd diff_matrix(const Eigen::VectorXd& points) {
    const Eigen::Index n = points.size();
    if (n < 2) throw std::invalid_argument("diff_matrix: need at least 2 points");

    Eigen::VectorXd bary = Eigen::VectorXd::Ones(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == j) continue;
            const double gap = points(j) - points(k);
            if (gap == 0.0) throw std::invalid_argument("diff_matrix: duplicate points");
            bary(j) /= gap;
        }
    }

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            d(i, j) = (bary(j) / bary(i)) / (points(i) - points(j));
            row_sum += d(i, j);
        }
        d(i, i) = -row_sum;
    }
    return d;
}

}  // namespace qnsolve
