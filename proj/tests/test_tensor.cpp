#include "qnsolve/errors.hpp"
#include "qnsolve/jacobi.hpp"
#include "qnsolve/tensor.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

using namespace qnsolve;

namespace {

std::shared_ptr<const Operator1D> axis(const Scheme& s, int mesh, const AxisBoundary& bc, Interval iv = {0.0, 1.0}) {
    return std::make_shared<const Operator1D>(attach_eigendecomposition(make_operator_1d(s, mesh, iv, bc)));
}

GridField random_field(const std::vector<Eigen::Index>& shape, std::mt19937_64& rng) {
    GridField f(shape);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.values()(i) = u(rng);
    return f;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

}  // namespace

TEST_CASE("jacobi matches a dense symmetric solver") {
    std::mt19937_64 rng(7);
    for (int n : {1, 2, 5, 12, 31}) {
        CAPTURE(n);
        Eigen::MatrixXd a = random_matrix(n, n, rng);
        a = (a + a.transpose()).eval();
        const SymmetricEigenResult r = jacobi_eigen(a);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        CHECK((r.values - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 1; i < n; ++i) CHECK(r.values(i) >= r.values(i - 1));
        CHECK((r.vectors.transpose() * r.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((a * r.vectors - r.vectors * r.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
    }
    CHECK_THROWS_AS((void)jacobi_eigen(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("split jacobi agrees with plain jacobi on centrosymmetric input") {
    for (int n : {6, 7}) {
        const Operator1D op = fdm_operator_1d(n + 1, {0.0, 1.0}, AxisBoundary::dirichlet());
        const SymmetricEigenResult a = jacobi_eigen(op.stiffness);
        const SymmetricEigenResult b = jacobi_eigen_split(op.stiffness);
        CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((op.stiffness * b.vectors - b.vectors * b.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((b.vectors.transpose() * b.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    }
    std::mt19937_64 rng(3);
    Eigen::MatrixXd a = random_matrix(9, 9, rng);
    a = (a + a.transpose()).eval();
    const SymmetricEigenResult r = jacobi_eigen_split(a);  // not centrosymmetric: plain path
    CHECK((a * r.vectors - r.vectors * r.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("attach_eigendecomposition") {
    SUBCASE("fdm Dirichlet closed form") {
        const Operator1D op = attach_eigendecomposition(fdm_operator_1d(4, {0.0, 1.0}, AxisBoundary::dirichlet()));
        REQUIRE(op.eigen);
        const double r2 = std::sqrt(2.0);
        CHECK(std::abs(op.eigen->values(0) - 16.0 * (2.0 - r2)) < 1e-12);
        CHECK(std::abs(op.eigen->values(1) - 32.0) < 1e-12);
        CHECK(std::abs(op.eigen->values(2) - 16.0 * (2.0 + r2)) < 1e-12);
    }
    SUBCASE("eigenpairs and inverse on several operators") {
        for (const Operator1D& raw :
             {sem_operator_1d(2, 5, {0.0, 1.0}, AxisBoundary::neumann()), sem_operator_1d(3, 3, {-1.0, 2.0}, AxisBoundary::dirichlet()),
              fdm_operator_1d(7, {0.0, 1.0}, AxisBoundary::neumann()),
              fdm_operator_1d(7, {0.0, 1.0}, {BoundaryCondition::neumann(), BoundaryCondition::dirichlet()})}) {
            const Operator1D op = attach_eigendecomposition(raw);
            const AxisEigen& e = *op.eigen;
            const double hn = op.h_matrix.cwiseAbs().maxCoeff();
            CHECK((op.h_matrix * e.vectors - e.vectors * e.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-10 * hn);
            CHECK((e.vectors * e.inv_vectors - Eigen::MatrixXd::Identity(op.size(), op.size())).cwiseAbs().maxCoeff() < 1e-11);
            for (Eigen::Index i = 1; i < op.size(); ++i) CHECK(e.values(i) >= e.values(i - 1));
        }
    }
    SUBCASE("Neumann zero mode is constant") {
        for (const Operator1D& raw :
             {sem_operator_1d(2, 5, {0.0, 1.0}, AxisBoundary::neumann()), fdm_operator_1d(9, {0.0, 1.0}, AxisBoundary::neumann())}) {
            const Operator1D op = attach_eigendecomposition(raw);
            CHECK(std::abs(op.eigen->values(0)) < 1e-10);
            const Eigen::VectorXd v = op.eigen->vectors.col(0);
            CHECK((v.array() - v(0)).abs().maxCoeff() < 1e-10 * std::abs(v(0)));
        }
    }
    SUBCASE("non-positive weight") {
        Operator1D op = fdm_operator_1d(4, {0.0, 1.0}, AxisBoundary::dirichlet());
        op.symmetrizer(1) = 0.0;
        CHECK_THROWS_AS((void)attach_eigendecomposition(op), InvalidStateError);
    }
}

TEST_CASE("kron contractions") {
    std::mt19937_64 rng(11);
    SUBCASE("2D identity and dense oracle") {
        const GridField x = random_field({3, 3}, rng);
        const Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3);
        CHECK((apply_kron_2d(i3, i3, x).values() - x.values()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::MatrixXd a = random_matrix(3, 3, rng);
        const Eigen::MatrixXd b = random_matrix(3, 3, rng);
        const Eigen::VectorXd dense = kron(b, a) * x.values();
        CHECK((apply_kron_2d(a, b, x).values() - dense).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((apply_kron_2d(a, i3, x).as_matrix() - a * x.as_matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("3D dense oracle") {
        const GridField x = random_field({2, 3, 2}, rng);
        const Eigen::MatrixXd a = random_matrix(2, 2, rng);
        const Eigen::MatrixXd b = random_matrix(3, 3, rng);
        const Eigen::MatrixXd c = random_matrix(2, 2, rng);
        const Eigen::VectorXd dense = kron(c, kron(b, a)) * x.values();
        CHECK((apply_kron_3d(a, b, c, x).values() - dense).cwiseAbs().maxCoeff() < 1e-14);
        const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
        const Eigen::MatrixXd i3 = Eigen::MatrixXd::Identity(3, 3);
        CHECK((apply_kron_3d(i2, i3, i2, x).values() - x.values()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((apply_kron_3d(a, i3, i2, x).values() - kron(Eigen::MatrixXd::Identity(6, 6), a) * x.values())
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
    SUBCASE("shape mismatch") {
        const GridField x = random_field({3, 2}, rng);
        CHECK_THROWS_AS((void)apply_kron_2d(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), x),
                        std::invalid_argument);
    }
}

TEST_CASE("apply_operator") {
    TensorOperator op;
    op.axes = {axis(Scheme::fdm(), 5, AxisBoundary::dirichlet()), axis(Scheme::sem(2), 2, AxisBoundary::dirichlet())};
    op.shift = 0.7;
    REQUIRE(op.shape() == std::vector<Eigen::Index>{4, 3});
    std::mt19937_64 rng(5);
    const GridField u = random_field(op.shape(), rng);
    CHECK((apply_operator(op, u).values() - op.assemble_dense() * u.values()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(apply_operator(op, GridField::zeros(op.shape())).values().cwiseAbs().maxCoeff() == 0.0);

    TensorOperator neu;
    neu.axes = {axis(Scheme::sem(2), 3, AxisBoundary::neumann()), axis(Scheme::fdm(), 4, AxisBoundary::neumann())};
    CHECK(apply_operator(neu, GridField::constant(neu.shape(), 1.0)).values().cwiseAbs().maxCoeff() < 1e-11);
    CHECK_THROWS_AS((void)apply_operator(neu, GridField::zeros({2, 2})), std::invalid_argument);
}

TEST_CASE("fast_shift_solve") {
    SUBCASE("2D fdm Dirichlet 3x3 against dense LU") {
        TensorOperator op;
        op.axes = {axis(Scheme::fdm(), 4, AxisBoundary::dirichlet()), axis(Scheme::fdm(), 4, AxisBoundary::dirichlet())};
        std::mt19937_64 rng(1);
        const GridField b = random_field(op.shape(), rng);
        const Eigen::MatrixXd a = op.assemble_dense() + Eigen::MatrixXd::Identity(9, 9);
        const Eigen::VectorXd ref = a.partialPivLu().solve(b.values());
        CHECK((fast_shift_solve(op, 1.0, b).values() - ref).cwiseAbs().maxCoeff() < 1e-12 * ref.cwiseAbs().maxCoeff());
    }
    SUBCASE("roundtrip with diffusion and shift in 3D") {
        TensorOperator op;
        op.axes = {axis(Scheme::sem(2), 2, AxisBoundary::neumann()), axis(Scheme::fdm(), 4, AxisBoundary::dirichlet()),
                   axis(Scheme::sem(3), 1, AxisBoundary::neumann())};
        op.shift = 0.3;
        op.diffusion = 0.01;
        std::mt19937_64 rng(2);
        const GridField b = random_field(op.shape(), rng);
        const GridField x = fast_shift_solve(op, 0.5, b);
        const Eigen::VectorXd back = apply_operator(op, x).values() + 0.5 * x.values();
        CHECK((back - b.values()).norm() < 1e-10 * b.values().norm());
    }
    SUBCASE("pure Neumann Laplacian is singular at beta 0") {
        TensorOperator op;
        op.axes = {axis(Scheme::fdm(), 4, AxisBoundary::neumann()), axis(Scheme::fdm(), 4, AxisBoundary::neumann())};
        const GridField b = GridField::constant(op.shape(), 1.0);
        CHECK_THROWS_AS((void)fast_shift_solve(op, 0.0, b), SingularShiftError);
        try {
            (void)fast_shift_solve(op, 0.0, b);
        } catch (const SingularShiftError& e) {
            CHECK(e.index()[0] == 0);
            CHECK(e.index()[1] == 0);
            CHECK(std::abs(e.denominator()) <= kSingularShiftGuard);
        }
        CHECK(smallest_denominator(op, 0.0).magnitude <= kSingularShiftGuard);
    }
    SUBCASE("missing eigendecomposition") {
        TensorOperator op;
        op.axes = {std::make_shared<const Operator1D>(fdm_operator_1d(4, {0.0, 1.0}, AxisBoundary::dirichlet()))};
        CHECK_FALSE(op.has_eigen());
        CHECK_THROWS_AS((void)fast_shift_solve(op, 1.0, GridField::zeros(op.shape())), InvalidStateError);
    }
}

TEST_CASE("spectrum composition") {
    TensorOperator op;
    op.axes = {axis(Scheme::fdm(), 5, AxisBoundary::neumann()), axis(Scheme::sem(2), 2, AxisBoundary::dirichlet())};
    op.shift = 2.0;
    Eigen::VectorXd spec = op.spectrum();
    std::sort(spec.data(), spec.data() + spec.size());
    Eigen::VectorXd dense = op.assemble_dense().eigenvalues().real();
    std::sort(dense.data(), dense.data() + dense.size());
    CHECK((spec - dense).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solve cost grows with contraction cost") {
    auto time_solve = [](int ny) {
        TensorOperator op;
        op.axes = {axis(Scheme::fdm(), 513, AxisBoundary::dirichlet()), axis(Scheme::fdm(), ny + 1, AxisBoundary::dirichlet())};
        const GridField b = GridField::constant(op.shape(), 1.0);
        double best = 1e300;
        for (int r = 0; r < 3; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const GridField x = fast_shift_solve(op, 1.0, b);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            CHECK(std::isfinite(x.values()(0)));
        }
        return best;
    };
    const double t1 = time_solve(512);
    const double t2 = time_solve(1024);
    CHECK(t2 < 8.0 * t1);
}
