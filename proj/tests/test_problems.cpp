#include "qnsolve/errors.hpp"
#include "qnsolve/problems.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace qnsolve;

namespace {

double eval_exact(const ProblemPreset& p, std::vector<double> x) {
    std::array<double, 2> out{};
    p.spec.exact(x, std::span<double>(out.data(), 1));
    return out[0];
}

}  // namespace

TEST_CASE("registry") {
    const std::vector<std::string> names = preset_names();
    CHECK(names.size() == 8);
    for (const std::string& n : names) {
        CAPTURE(n);
        const ProblemPreset p = preset(n);
        CHECK(p.name == n);
        CHECK(p.tol > 0.0);
        CHECK(p.spec.dim() == static_cast<int>(p.dof.size()));
    }
    CHECK_THROWS_AS((void)preset("ex9"), ConfigError);
    try {
        (void)preset("nope");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gray_scott") != std::string::npos);
    }
}

TEST_CASE("exact solutions") {
    CHECK(std::abs(eval_exact(preset("ex1"), {0.5}) - 1.0) < 1e-15);
    CHECK(std::abs(eval_exact(preset("ex2d1"), {0.0, 0.0}) - 1.0) < 1e-15);
    CHECK(std::abs(eval_exact(preset("ex2d1"), {0.5, 0.0})) < 1e-15);
    CHECK(std::abs(eval_exact(preset("ex3d1"), {0.0, 0.0, 1.0}) - 1.0) < 1e-15);
    for (const std::string& n : preset_names()) {
        const ProblemPreset p = preset(n);
        if (!p.spec.exact) continue;
        const DiscreteProblem d = discretize_problem(p.spec, p.scheme, std::vector<int>(p.spec.dim(), 4), false);
        CHECK(sample(d, p.spec.exact)[0].values().allFinite());
    }
}

TEST_CASE("manufactured residuals vanish under refinement") {
    for (const char* name : {"ex1", "ex2d1"}) {
        const ProblemPreset p = preset(name);
        double prev = 1e300;
        for (int m : {4, 8, 16}) {
            const DiscreteProblem d = discretize_problem(p.spec, Scheme::sem(2), std::vector<int>(p.spec.dim(), m));
            const double r = l2_norm(d, residual(d, sample(d, p.spec.exact)));
            CHECK(r < prev);
            prev = r;
        }
    }
}

TEST_CASE("Gray-Scott") {
    const ProblemPreset gs = preset("gray_scott");
    CHECK(gs.damping == 0.1);
    std::array<double, 4> jac{};
    const std::array<double, 2> x{0.3, 0.3};
    const std::array<double, 2> u{0.0, 1.0};
    gs.spec.jacobian(x, u, jac);
    CHECK(std::abs(jac[0] - 0.105) < 1e-15);
    CHECK(jac[1] == 0.0);
    CHECK(jac[2] == 0.0);
    CHECK(std::abs(jac[3] - 0.04) < 1e-15);

    const DiscreteProblem d = discretize_problem(gs.spec, gs.scheme, {16, 16});
    State trivial = d.zeros();
    trivial[1].values().setOnes();
    const State r = residual(d, trivial);
    CHECK(r[0].values().cwiseAbs().maxCoeff() == 0.0);
    CHECK(r[1].values().cwiseAbs().maxCoeff() == 0.0);

    const auto patterns = gray_scott_patterns();
    CHECK(patterns.size() == 8);
    for (const BumpPattern& b : patterns) {
        const State s = gray_scott_initial_state(d, b);
        CHECK(s[0].values().maxCoeff() <= b.height + 1e-15);
        CHECK(s[0].values().minCoeff() >= 0.0);
        CHECK(s[1].values().minCoeff() >= 0.0);
        CHECK(s[1].values().maxCoeff() <= 1.0);
    }
}

TEST_CASE("potential is nonnegative on the ex3d2 box") {
    const ProblemPreset p = preset("ex3d2");
    std::array<double, 1> f{};
    std::array<double, 1> j{};
    for (double x = -8.0; x <= 8.0; x += 0.25)
        for (double y = -8.0; y <= 8.0; y += 0.5) {
            const std::array<double, 3> pt{x, y, -x};
            const std::array<double, 1> zero{0.0};
            p.spec.jacobian(pt, zero, j);  // f'(0) = V(x)
            CHECK(j[0] >= 0.0);
            p.spec.reaction(pt, zero, f);
            CHECK(f[0] == 0.0);
        }
}

TEST_CASE("coefficient stream") {
    // First output of std::mt19937_64 with its default seed 5489.
    const std::uint64_t first = 14514284786278117030ULL;
    CoefficientStream s(5489);
    const double expect = 2.0 * ((static_cast<double>(first >> 11) + 0.5) * 0x1.0p-53) - 1.0;
    CHECK(s.next() == expect);
    CoefficientStream t(42);
    for (int i = 0; i < 1000; ++i) {
        const double v = t.next();
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("perturbation") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);

    SUBCASE("scale zero") {
        CHECK(perturbation(1, 3, 0.0, {x}).values().cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("normalized peak") {
        for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
            CHECK(std::abs(perturbation(2, seed, 0.3, {x, y}).values().cwiseAbs().maxCoeff() - 0.3) < 1e-13);
            CHECK(std::abs(perturbation(3, seed, 1.0, {x, y, x}).values().cwiseAbs().maxCoeff() - 1.0) < 1e-13);
        }
    }
    SUBCASE("1D polynomial oracle") {
        CoefficientStream s(42);
        std::array<double, 5> a{};
        for (double& c : a) c = s.next();
        Eigen::VectorXd p(x.size());
        for (Eigen::Index q = 0; q < x.size(); ++q)
            p(q) = a[0] + x(q) * (a[1] + x(q) * (a[2] + x(q) * (a[3] + x(q) * a[4])));
        p /= p.cwiseAbs().maxCoeff();
        CHECK((perturbation(1, 42, 1.0, {x}).values() - p).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("2D draw order is lexicographic in (i, j)") {
        CoefficientStream s(7);
        double a[5][5];
        for (auto& row : a)
            for (double& c : row) c = s.next();
        Eigen::VectorXd p(x.size() * y.size());
        for (Eigen::Index qy = 0; qy < y.size(); ++qy)
            for (Eigen::Index qx = 0; qx < x.size(); ++qx) {
                double sum = 0.0;
                for (int i = 0; i < 5; ++i)
                    for (int j = 0; j < 5; ++j) sum += a[i][j] * std::pow(x(qx), i) * std::pow(y(qy), j);
                p(qx + x.size() * qy) = sum;
            }
        p /= p.cwiseAbs().maxCoeff();
        CHECK((perturbation(2, 7, 1.0, {x, y}).values() - p).cwiseAbs().maxCoeff() < 1e-13);
    }
    SUBCASE("reproducible") {
        const GridField a = perturbation(1, 42, 1.0, {x});
        const GridField b = perturbation(1, 42, 1.0, {x});
        CHECK(a.values() == b.values());
        CHECK(perturbation(1, 43, 1.0, {x}).values() != a.values());
    }
    SUBCASE("bad input") {
        CHECK_THROWS_AS((void)perturbation(1, 0, -1.0, {x}), std::invalid_argument);
        CHECK_THROWS_AS((void)perturbation(2, 0, 1.0, {x}), std::invalid_argument);
    }
}

TEST_CASE("mesh_for_preset") {
    const ProblemPreset ex2d1 = preset("ex2d1");
    CHECK(mesh_for_preset(ex2d1, ex2d1.scheme, {50}).size() == 2);
    CHECK_THROWS_AS((void)mesh_for_preset(ex2d1, ex2d1.scheme, {50, 50, 50}), ConfigError);
    const ProblemPreset ex1 = preset("ex1");
    const DiscreteProblem d = discretize_problem(ex1.spec, ex1.scheme, mesh_for_preset(ex1, ex1.scheme, ex1.dof), false);
    CHECK(d.points() == 1000);
}
