#include "qnsolve/errors.hpp"
#include "qnsolve/problems.hpp"
#include "qnsolve/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qnsolve;

namespace {

constexpr double pi = std::numbers::pi;

// -u'' + shift u + c u^3 + source = 0 on (0,1) with homogeneous Dirichlet data.
ProblemSpec cubic_1d(double c, double shift = 0.0) {
    ProblemSpec s;
    s.name = "cubic";
    s.domain = {{0.0, 1.0}};
    s.shift = {shift};
    s.bc = {{AxisBoundary::dirichlet()}};
    s.reaction = [c](auto, auto u, auto f) { f[0] = c * u[0] * u[0] * u[0]; };
    s.jacobian = [c](auto, auto u, auto j) { j[0] = 3.0 * c * u[0] * u[0]; };
    return s;
}

ProblemSpec linear_2d(BcKind kind) {
    ProblemSpec s;
    s.name = "linear";
    s.domain = {{0.0, 1.0}, {0.0, 2.0}};
    s.shift = {1.0};
    const AxisBoundary bc = kind == BcKind::dirichlet ? AxisBoundary::dirichlet() : AxisBoundary::neumann();
    s.bc = {{bc, bc}};
    s.reaction = [](auto, auto, auto f) { f[0] = 0.0; };
    s.jacobian = [](auto, auto, auto j) { j[0] = 0.0; };
    s.source = [](auto x, auto out) { out[0] = -std::sin(pi * x[0]) * (1.0 + x[1]); };
    return s;
}

State add(State a, const State& b) {
    for (std::size_t c = 0; c < a.size(); ++c) a[c].values() += b[c].values();
    return a;
}

}  // namespace

TEST_CASE("residual") {
    SUBCASE("hand stencil, fdm n=4, f = u^3, U = 1 inside") {
        const DiscreteProblem p = discretize_problem(cubic_1d(1.0, 0.5), Scheme::fdm(), {4});
        State u = p.zeros();
        u[0].values().setOnes();
        const State r = residual(p, u);
        // middle row: 16 * (2 - 1 - 1) + lambda + 1
        CHECK(std::abs(r[0](1) - 1.5) < 1e-12);
        CHECK(std::abs(r[0](0) - (16.0 + 1.5)) < 1e-12);
    }
    SUBCASE("Neumann constant with no reaction") {
        ProblemSpec s = linear_2d(BcKind::neumann);
        s.shift = {0.0};
        s.source = nullptr;
        const DiscreteProblem p = discretize_problem(s, Scheme::sem(2), {3, 2});
        State u = p.zeros();
        u[0].values().setConstant(2.5);
        CHECK(l2_norm(p, residual(p, u)) < 1e-11);
    }
    SUBCASE("manufactured ex1 residual shrinks with refinement") {
        const ProblemPreset ex1 = preset("ex1");
        double prev = 1e300;
        for (int cells : {16, 32, 64}) {
            const DiscreteProblem p = discretize_problem(ex1.spec, Scheme::sem(2), {cells});
            const double r = l2_norm(p, residual(p, sample(p, ex1.spec.exact)));
            CHECK(r < 1.0);
            CHECK(r < prev);
            prev = r;
        }
    }
    SUBCASE("non-finite reaction") {
        ProblemSpec s = cubic_1d(1.0);
        s.reaction = [](auto, auto, auto f) { f[0] = std::nan(""); };
        const DiscreteProblem p = discretize_problem(s, Scheme::fdm(), {4});
        CHECK_THROWS_AS((void)residual(p, p.zeros()), EvaluationError);
    }
}

TEST_CASE("jacobian spectra") {
    SUBCASE("m=1 cubic") {
        const DiscreteProblem p = discretize_problem(cubic_1d(1.0), Scheme::fdm(), {4});
        State u = p.zeros();
        u[0].values() << 0.0, -1.0, 0.5;
        const SpectrumBounds b = nonlinear_jacobian_eig_bounds(p, u);
        CHECK(b.min == 0.0);
        CHECK(b.max == 3.0);
        CHECK_FALSE(b.complex);
    }
    SUBCASE("2x2 closed form") {
        const SpectrumBounds b = block_eigenvalues_2x2(1, 2, 3, 4);
        CHECK(std::abs(b.min - (5 - std::sqrt(33.0)) / 2) < 1e-14);
        CHECK(std::abs(b.max - (5 + std::sqrt(33.0)) / 2) < 1e-14);
        const SpectrumBounds tri = block_eigenvalues_2x2(-2, 7, 0, 5);
        CHECK(tri.min == -2.0);
        CHECK(tri.max == 5.0);
        const SpectrumBounds cx = block_eigenvalues_2x2(1, -4, 4, 3);
        CHECK(cx.complex);
        CHECK(cx.min == 2.0);
        CHECK(cx.max == 2.0);
    }
    SUBCASE("Gray-Scott trivial state") {
        const ProblemPreset gs = preset("gray_scott");
        const DiscreteProblem p = discretize_problem(gs.spec, gs.scheme, {8, 8});
        State u = p.zeros();
        u[1].values().setOnes();
        const SpectrumBounds b = nonlinear_jacobian_eig_bounds(p, u);
        // Block [[mu + rho, 0], [0, rho]] at every node.
        CHECK(std::abs(b.min - 0.04) < 1e-15);
        CHECK(std::abs(b.max - 0.105) < 1e-15);
    }
}

TEST_CASE("beta strategies") {
    const SpectrumBounds b{1.0, 3.0, false};
    CHECK(BetaStrategy::midpoint().choose(b) == 2.0);
    CHECK(BetaStrategy::sum().choose(b) == 4.0);
    CHECK(BetaStrategy::max_eig().choose(b) == 3.0);
    CHECK(BetaStrategy::min_eig().choose(b) == 1.0);
    CHECK(BetaStrategy::fixed(7.5).choose(b) == 7.5);
    CHECK(BetaStrategy::parse("fixed:0.5").value == 0.5);
    CHECK(BetaStrategy::parse("max").kind == BetaStrategy::Kind::max_eig);
    CHECK(BetaStrategy::parse("fixed:10").label() == "fixed:10");
    CHECK_THROWS((void)BetaStrategy::parse("fixed:"));
    CHECK_THROWS((void)BetaStrategy::parse("median"));
}

TEST_CASE("linear problems take one step") {
    for (BcKind kind : {BcKind::dirichlet, BcKind::neumann}) {
        const DiscreteProblem p = discretize_problem(linear_2d(kind), Scheme::sem(2), {4, 3});
        const SolveReport qn = quasi_newton_solve(p, p.zeros(), {});
        CHECK(qn.converged);
        CHECK(qn.iterations == 1);
        CHECK(qn.beta_history.front() == 0.0);
        const SolveReport nt = newton_solve(p, p.zeros(), {});
        CHECK(nt.iterations == 1);
        CHECK(l2_distance(p, qn.solution, nt.solution) < 1e-12);
    }
}

TEST_CASE("quasi-Newton on ex1 contracts to the Newton root") {
    const ProblemPreset ex1 = preset("ex1");
    const DiscreteProblem p = discretize_problem(ex1.spec, ex1.scheme, mesh_for_preset(ex1, ex1.scheme, {200}));
    SolveOptions opts;
    opts.tol = 1e-10;
    const SolveReport ref = quasi_newton_solve(p, sample(p, ex1.spec.exact), opts);
    REQUIRE(ref.converged);

    const State start = add(ref.solution, perturbation_state(p, 3, 0.1));
    const SolveReport qn = quasi_newton_solve(p, start, opts);
    const SolveReport nt = newton_solve(p, start, opts);
    REQUIRE(qn.converged);
    REQUIRE(nt.converged);
    CHECK(l2_distance(p, qn.solution, ref.solution) <= 1e-8);
    CHECK(l2_distance(p, qn.solution, nt.solution) <= 1e-8);
    CHECK(nt.iterations < qn.iterations);
    // Monotone decrease once the iteration has entered its contraction regime.
    const auto& h = qn.residual_history;
    for (std::size_t i = 2; i < h.size(); ++i) CHECK(h[i] < h[i - 1]);
    CHECK(qn.residual_history.size() == static_cast<std::size_t>(qn.iterations) + 1);
    CHECK(qn.beta_history.size() == static_cast<std::size_t>(qn.iterations));
}

TEST_CASE("solver errors") {
    SUBCASE("a singular fixed shift is nudged off the kernel") {
        ProblemSpec s = linear_2d(BcKind::neumann);
        s.shift = {0.0};
        s.source = nullptr;
        const DiscreteProblem p = discretize_problem(s, Scheme::fdm(), {4, 4});
        SolveOptions o;
        o.beta = BetaStrategy::fixed(0.0);
        State u = p.zeros();
        u[0].values().setRandom();
        const SolveReport r = quasi_newton_solve(p, u, o);
        CHECK(r.converged);
        CHECK(r.beta_history.front() == 10.0 * kSingularShiftGuard);
    }
    SUBCASE("divergence") {
        const DiscreteProblem p = discretize_problem(cubic_1d(-50.0), Scheme::fdm(), {8});
        State u = p.zeros();
        u[0].values().setConstant(50.0);
        SolveOptions o;
        o.beta = BetaStrategy::fixed(1.0);
        CHECK_THROWS_AS((void)quasi_newton_solve(p, u, o), DivergenceError);
    }
    SUBCASE("max_iter reached without convergence") {
        const DiscreteProblem p = discretize_problem(cubic_1d(1.0), Scheme::fdm(), {8});
        State u = p.zeros();
        u[0].values().setConstant(1.0);
        SolveOptions o;
        o.max_iter = 2;
        o.beta = BetaStrategy::fixed(100.0);
        const SolveReport r = quasi_newton_solve(p, u, o);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 2);
    }
    SUBCASE("Newton refuses oversized problems") {
        const ProblemPreset ex2d1 = preset("ex2d1");
        const DiscreteProblem p = discretize_problem(ex2d1.spec, Scheme::sem(2), {80, 80}, true);
        CHECK_THROWS_AS((void)newton_solve(p, p.zeros(), {}), ConfigError);
    }
    SUBCASE("bad options") {
        const DiscreteProblem p = discretize_problem(cubic_1d(1.0), Scheme::fdm(), {8});
        SolveOptions o;
        o.damping = 0.0;
        CHECK_THROWS_AS((void)quasi_newton_solve(p, p.zeros(), o), std::invalid_argument);
        o.damping = 1.0;
        o.tol = -1.0;
        CHECK_THROWS_AS((void)quasi_newton_solve(p, p.zeros(), o), std::invalid_argument);
    }
}

TEST_CASE("eigen mode") {
    ProblemSpec s;
    s.name = "laplace";
    s.domain = {{0.0, 1.0}, {0.0, 1.0}};
    s.bc = {{AxisBoundary::dirichlet(), AxisBoundary::dirichlet()}};
    s.reaction = [](auto, auto, auto f) { f[0] = 0.0; };
    s.jacobian = [](auto, auto, auto j) { j[0] = 0.0; };
    const DiscreteProblem p = discretize_problem(s, Scheme::sem(2), {4, 4});
    State u = p.zeros();
    u[0].values().setOnes();
    SolveOptions o;
    o.tol = 1e-10;
    const SolveReport r = eigen_mode_solve(p, u, o);
    REQUIRE(r.converged);
    for (double n : r.norm_history) CHECK(std::abs(n - 1.0) <= 1e-12);
    const Eigen::VectorXd spec = p.ops.front().spectrum();
    CHECK(std::abs(r.lambda_history.back() - spec.minCoeff()) < 1e-8);
    CHECK_THROWS_AS((void)eigen_mode_solve(p, p.zeros(), o), NumericalError);
}

TEST_CASE("contraction bound") {
    const std::vector<double> mu{1.0, 3.0};
    const std::vector<double> lam{2.0, 5.0, 9.0};
    CHECK(std::abs(contraction_ratio(mu, lam, 2.0) - 0.25) < 1e-15);
    CHECK(std::abs(contraction_ratio_piecewise(1.0, 3.0, 2.0, 2.0) - 0.25) < 1e-15);
    double best_beta = 0.0;
    double best = 1e300;
    double prev = 1e300;
    for (int i = 0; i <= 550; ++i) {
        const double beta = 0.5 + 0.01 * i;
        const double g = contraction_ratio(mu, lam, beta);
        CHECK(std::abs(g - contraction_ratio_piecewise(1.0, 3.0, 2.0, beta)) < 1e-14);
        if (beta < 2.0) CHECK(g < prev);
        if (beta > 2.0 + 1e-12) CHECK(g > prev);
        prev = g;
        if (g < best) {
            best = g;
            best_beta = beta;
        }
    }
    CHECK(std::abs(best_beta - 2.0) < 1e-9);
    CHECK_THROWS_AS((void)contraction_ratio({}, lam, 1.0), std::invalid_argument);

    const DiscreteProblem p = discretize_problem(cubic_1d(1.0), Scheme::fdm(), {16});
    State u = p.zeros();
    u[0].values().setConstant(0.5);
    const ContractionBound cb = contraction_bound(p, u, 0.75);
    CHECK(cb.beta == 0.75);
    CHECK(cb.g_value == doctest::Approx(0.0).epsilon(1e-14));
}
