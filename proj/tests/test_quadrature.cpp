#include "qnsolve/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace qnsolve;

namespace {

double monomial_integral(int p) { return p % 2 == 1 ? 0.0 : 2.0 / (p + 1); }

double quad_monomial(const QuadratureRule& r, int p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += r.weights(i) * std::pow(r.points(i), p);
    return s;
}

}  // namespace

TEST_CASE("two-point rule is the trapezoid") {
    const QuadratureRule r = gauss_lobatto(2);
    CHECK(r.points(0) == -1.0);
    CHECK(r.points(1) == 1.0);
    CHECK(r.weights(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.weights(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("three-point rule is Simpson") {
    const QuadratureRule r = gauss_lobatto(3);
    CHECK(std::abs(r.points(1)) < 1e-15);
    CHECK(std::abs(r.weights(0) - 1.0 / 3.0) < 1e-14);
    CHECK(std::abs(r.weights(1) - 4.0 / 3.0) < 1e-14);
    CHECK(std::abs(r.weights(2) - 1.0 / 3.0) < 1e-14);
}

TEST_CASE("four-point rule") {
    const QuadratureRule r = gauss_lobatto(4);
    const double x = 1.0 / std::sqrt(5.0);
    CHECK(std::abs(r.points(1) + x) < 1e-14);
    CHECK(std::abs(r.points(2) - x) < 1e-14);
    CHECK(std::abs(r.weights(0) - 1.0 / 6.0) < 1e-14);
    CHECK(std::abs(r.weights(1) - 5.0 / 6.0) < 1e-14);
    CHECK(std::abs(quad_monomial(r, 4) - 0.4) < 1e-14);
}

TEST_CASE("exact to degree 2n-3 and not beyond") {
    for (int n = 2; n <= 8; ++n) {
        CAPTURE(n);
        const QuadratureRule r = gauss_lobatto(n);
        CHECK(r.points(0) == -1.0);
        CHECK(r.points(n - 1) == 1.0);
        for (int i = 1; i < n; ++i) CHECK(r.points(i) > r.points(i - 1));
        CHECK(std::abs(r.weights.sum() - 2.0) < 1e-13);
        CHECK((r.weights.array() > 0.0).all());
        for (int p = 0; p <= 2 * n - 3; ++p) CHECK(std::abs(quad_monomial(r, p) - monomial_integral(p)) < 1e-12);
        CHECK(std::abs(quad_monomial(r, 2 * n - 2) - monomial_integral(2 * n - 2)) > 1e-6);
    }
}

TEST_CASE("fewer than two points is rejected") {
    CHECK_THROWS_AS((void)gauss_lobatto(1), std::invalid_argument);
    CHECK_THROWS_AS((void)gauss_lobatto(0), std::invalid_argument);
}

TEST_CASE("legendre recurrence") {
    // P_2 = (3x^2 - 1)/2, P_3 = (5x^3 - 3x)/2
    const double x = 0.3;
    CHECK(std::abs(legendre(2, x).value - (3 * x * x - 1) / 2) < 1e-15);
    CHECK(std::abs(legendre(3, x).value - (5 * x * x * x - 3 * x) / 2) < 1e-15);
    CHECK(std::abs(legendre(3, x).derivative - (15 * x * x - 3) / 2) < 1e-14);
}

TEST_CASE("differentiation matrix") {
    SUBCASE("linear elements") {
        const Eigen::MatrixXd d = diff_matrix(gauss_lobatto(2));
        CHECK(std::abs(d(0, 0) + 0.5) < 1e-15);
        CHECK(std::abs(d(0, 1) - 0.5) < 1e-15);
        CHECK(std::abs(d(1, 0) + 0.5) < 1e-15);
        CHECK(std::abs(d(1, 1) - 0.5) < 1e-15);
    }
    SUBCASE("x^2 on three nodes") {
        const QuadratureRule r = gauss_lobatto(3);
        const Eigen::VectorXd dv = diff_matrix(r) * r.points.array().square().matrix();
        CHECK(std::abs(dv(0) + 2.0) < 1e-14);
        CHECK(std::abs(dv(1)) < 1e-14);
        CHECK(std::abs(dv(2) - 2.0) < 1e-14);
    }
    SUBCASE("rows annihilate constants, reproduce x' = 1 and exact to degree n-1") {
        for (int n = 2; n <= 8; ++n) {
            CAPTURE(n);
            const QuadratureRule r = gauss_lobatto(n);
            const Eigen::MatrixXd d = diff_matrix(r);
            CHECK((d * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((d * r.points - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-13);
            const int p = n - 1;
            const Eigen::VectorXd f = r.points.array().pow(p);
            const Eigen::VectorXd df = p * r.points.array().pow(p - 1);
            CHECK((d * f - df).cwiseAbs().maxCoeff() < 1e-11);
        }
    }
    SUBCASE("duplicate points are rejected") {
        Eigen::VectorXd pts(3);
        pts << -1.0, 0.0, 0.0;
        CHECK_THROWS_AS((void)diff_matrix(pts), std::invalid_argument);
    }
}
