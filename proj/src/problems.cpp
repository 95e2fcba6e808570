#include "qnsolve/problems.hpp"

#include "qnsolve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qnsolve {

namespace {

constexpr double kPi = std::numbers::pi;

// Gray-Scott constants.
constexpr double kDiffA = 2.5e-4;
constexpr double kDiffS = 5e-4;
constexpr double kRho = 0.04;
constexpr double kMu = 0.065;

// Periodic-plus-harmonic potential shared by the two 3D problems.
double potential(std::span<const double> x) {
    double v = 0.0;
    for (double xi : x) {
        const double s = std::sin(kPi * xi / 4.0);
        v += 100.0 * s * s + xi * xi;
    }
    return v;
}

// Flat-topped bumps exp(-(r/w)^4), capped at 1 where they overlap.
double bump_sum(const BumpPattern& pattern, double x, double y) {
    double sum = 0.0;
    const double w2 = pattern.width * pattern.width;
    for (const auto& c : pattern.centers) {
        const double r2 = ((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1])) / w2;
        sum += std::exp(-r2 * r2);
    }
    return std::min(1.0, sum);
}

std::vector<std::vector<AxisBoundary>> uniform_bc(int components, int dim, const AxisBoundary& axis) {
    return std::vector<std::vector<AxisBoundary>>(static_cast<std::size_t>(components),
                                                  std::vector<AxisBoundary>(static_cast<std::size_t>(dim), axis));
}

ProblemPreset make_ex1() {
    ProblemPreset p;
    p.name = "ex1";
    p.summary = "-u'' + u^3 = pi^2 sin(pi x) + sin^3(pi x) on (0,1), u(0) = u(1) = 0";
    p.spec.name = p.name;
    p.spec.domain = {{0.0, 1.0}};
    p.spec.bc = uniform_bc(1, 1, AxisBoundary::dirichlet());
    p.spec.reaction = [](auto, auto u, auto f) { f[0] = u[0] * u[0] * u[0]; };
    p.spec.jacobian = [](auto, auto u, auto j) { j[0] = 3.0 * u[0] * u[0]; };
    p.spec.source = [](auto x, auto out) {
        const double s = std::sin(kPi * x[0]);
        out[0] = -(kPi * kPi * s + s * s * s);
    };
    p.spec.exact = [](auto x, auto out) { out[0] = std::sin(kPi * x[0]); };
    p.scheme = Scheme::fdm();
    p.dof = {1000};
    p.tol = 1e-9;
    return p;
}

ProblemPreset make_ex2() {
    ProblemPreset p;
    p.name = "ex2";
    p.summary = "-u'' - (1 + u^4) = 0 on (0,1), u'(0) = 0, u(1) = 0";
    p.spec.name = p.name;
    p.spec.domain = {{0.0, 1.0}};
    p.spec.bc = {{AxisBoundary{BoundaryCondition::neumann(0.0), BoundaryCondition::dirichlet(0.0)}}};
    p.spec.reaction = [](auto, auto u, auto f) {
        const double u2 = u[0] * u[0];
        f[0] = -(1.0 + u2 * u2);
    };
    p.spec.jacobian = [](auto, auto u, auto j) { j[0] = -4.0 * u[0] * u[0] * u[0]; };
    p.scheme = Scheme::fdm();
    p.dof = {1000};
    p.initial_guess = [](auto, auto out) { out[0] = 0.0; };
    p.tol = 1e-9;
    return p;
}

ProblemPreset make_example3() {
    ProblemPreset p;
    p.name = "example3";
    p.summary = "-u'' + u^2 = 0 on (0,1), u(0) = 0, u(1) = 1";
    p.spec.name = p.name;
    p.spec.domain = {{0.0, 1.0}};
    p.spec.bc = uniform_bc(1, 1, AxisBoundary::dirichlet(0.0, 1.0));
    p.spec.reaction = [](auto, auto u, auto f) { f[0] = u[0] * u[0]; };
    p.spec.jacobian = [](auto, auto u, auto j) { j[0] = 2.0 * u[0]; };
    p.scheme = Scheme::fdm();
    p.dof = {1000};
    p.initial_guess = [](auto x, auto out) { out[0] = x[0]; };
    p.tol = 1e-9;
    return p;
}

ProblemPreset make_ex2d1() {
    ProblemPreset p;
    p.name = "ex2d1";
    p.summary = "-Lap u + u^3 + u = -Lap g + g^3 + g on (-1,1)^2, du/dn = 0, g = cos(pi x) cos(2 pi y)";
    p.spec.name = p.name;
    p.spec.domain = {{-1.0, 1.0}, {-1.0, 1.0}};
    p.spec.shift = {1.0};
    p.spec.bc = uniform_bc(1, 2, AxisBoundary::neumann());
    p.spec.reaction = [](auto, auto u, auto f) { f[0] = u[0] * u[0] * u[0]; };
    p.spec.jacobian = [](auto, auto u, auto j) { j[0] = 3.0 * u[0] * u[0]; };
    p.spec.source = [](auto x, auto out) {
        const double g = std::cos(kPi * x[0]) * std::cos(2.0 * kPi * x[1]);
        out[0] = -(5.0 * kPi * kPi * g + g * g * g + g);
    };
    p.spec.exact = [](auto x, auto out) { out[0] = std::cos(kPi * x[0]) * std::cos(2.0 * kPi * x[1]); };
    p.scheme = Scheme::sem(2);
    p.dof = {50, 50};
    return p;
}

ProblemPreset make_2dex() {
    ProblemPreset p;
    p.name = "2dex";
    p.summary = "-Lap u - u^2 = -1600 sin(pi x) sin(pi y) on (0,1)^2, u = 0 on the boundary";
    p.spec.name = p.name;
    p.spec.domain = {{0.0, 1.0}, {0.0, 1.0}};
    p.spec.bc = uniform_bc(1, 2, AxisBoundary::dirichlet());
    p.spec.reaction = [](auto, auto u, auto f) { f[0] = -u[0] * u[0]; };
    p.spec.jacobian = [](auto, auto u, auto j) { j[0] = -2.0 * u[0]; };
    p.spec.source = [](auto x, auto out) { out[0] = 1600.0 * std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
    p.scheme = Scheme::fdm();
    p.dof = {200, 200};
    p.initial_guess = [](auto, auto out) { out[0] = 0.0; };
    p.tol = 1e-9;
    return p;
}

ProblemPreset make_gray_scott() {
    ProblemPreset p;
    p.name = "gray_scott";
    p.summary = "steady Gray-Scott: -D_A Lap A - S A^2 + (mu + rho) A = 0, -D_S Lap S + S A^2 - rho (1 - S) = 0, "
                "zero flux on (0,1)^2";
    p.spec.name = p.name;
    p.spec.domain = {{0.0, 1.0}, {0.0, 1.0}};
    p.spec.components = 2;
    p.spec.diffusion = {kDiffA, kDiffS};
    p.spec.bc = uniform_bc(2, 2, AxisBoundary::neumann());
    p.spec.reaction = [](auto, auto u, auto f) {
        const double a = u[0];
        const double s = u[1];
        f[0] = -s * a * a + (kMu + kRho) * a;
        f[1] = s * a * a - kRho * (1.0 - s);
    };
    p.spec.jacobian = [](auto, auto u, auto j) {
        const double a = u[0];
        const double s = u[1];
        j[0] = -2.0 * s * a + kMu + kRho;
        j[1] = -a * a;
        j[2] = 2.0 * s * a;
        j[3] = a * a + kRho;
    };
    p.scheme = Scheme::fdm();
    p.dof = {128, 128};
    p.damping = 0.1;
    p.initial_guess = [](auto x, auto out) {
        const BumpPattern pattern = gray_scott_patterns().front();
        out[0] = pattern.height * bump_sum(pattern, x[0], x[1]);
        out[1] = std::max(0.0, 1.0 - 2.0 * out[0]);
    };
    return p;
}

ProblemPreset make_ex3d1() {
    ProblemPreset p;
    p.name = "ex3d1";
    p.summary = "-Lap u + 10 u + 10 u^3 + V u = (same at g) on (-1,1)^3, du/dn = 0, g = cos(pi x) + cos(pi y) + cos(pi z)";
    p.spec.name = p.name;
    p.spec.domain = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    p.spec.shift = {10.0};
    p.spec.bc = uniform_bc(1, 3, AxisBoundary::neumann());
    p.spec.reaction = [](auto x, auto u, auto f) { f[0] = 10.0 * u[0] * u[0] * u[0] + potential(x) * u[0]; };
    p.spec.jacobian = [](auto x, auto u, auto j) { j[0] = 30.0 * u[0] * u[0] + potential(x); };
    p.spec.source = [](auto x, auto out) {
        const double g = std::cos(kPi * x[0]) + std::cos(kPi * x[1]) + std::cos(kPi * x[2]);
        out[0] = -(kPi * kPi * g + 10.0 * g + 10.0 * g * g * g + potential(x) * g);
    };
    p.spec.exact = [](auto x, auto out) {
        out[0] = std::cos(kPi * x[0]) + std::cos(kPi * x[1]) + std::cos(kPi * x[2]);
    };
    p.scheme = Scheme::sem(2);
    p.dof = {64, 64, 64};
    return p;
}

ProblemPreset make_ex3d2() {
    ProblemPreset p;
    p.name = "ex3d2";
    p.summary = "-Lap u + 1600 u^3 + V u = lambda u on (-8,8)^3, u = 0 on the boundary, unit L2 norm";
    p.spec.name = p.name;
    p.spec.domain = {{-8.0, 8.0}, {-8.0, 8.0}, {-8.0, 8.0}};
    p.spec.bc = uniform_bc(1, 3, AxisBoundary::dirichlet());
    p.spec.reaction = [](auto x, auto u, auto f) { f[0] = 1600.0 * u[0] * u[0] * u[0] + potential(x) * u[0]; };
    p.spec.jacobian = [](auto x, auto u, auto j) { j[0] = 4800.0 * u[0] * u[0] + potential(x); };
    p.scheme = Scheme::fdm();
    p.dof = {64, 64, 64};
    p.eigen_mode = true;
    p.initial_guess = [](auto x, auto out) { out[0] = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); };
    return p;
}

using Factory = ProblemPreset (*)();

struct Entry {
    const char* name;
    Factory make;
};

constexpr Entry kRegistry[] = {
    {"ex1", make_ex1},     {"ex2", make_ex2},               {"example3", make_example3},
    {"ex2d1", make_ex2d1}, {"2dex", make_2dex},             {"gray_scott", make_gray_scott},
    {"ex3d1", make_ex3d1}, {"ex3d2", make_ex3d2},
};

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const Entry& e : kRegistry) names.emplace_back(e.name);
    return names;
}

ProblemPreset preset(const std::string& name) {
    for (const Entry& e : kRegistry) {
        if (name == e.name) {
            ProblemPreset p = e.make();
            p.spec.validate();
            return p;
        }
    }
    std::string known;
    for (const Entry& e : kRegistry) known += std::string(known.empty() ? "" : ", ") + e.name;
    throw ConfigError("unknown problem '" + name + "' (known: " + known + ")");
}

std::vector<int> mesh_for_preset(const ProblemPreset& p, const Scheme& scheme, std::vector<int> dof) {
    const auto dim = static_cast<std::size_t>(p.spec.dim());
    if (dof.size() == 1 && dim > 1) dof.assign(dim, dof.front());
    if (dof.size() != dim)
        throw ConfigError("problem '" + p.name + "' needs " + std::to_string(dim) + " resolution value(s)");
    std::vector<int> mesh;
    for (std::size_t a = 0; a < dim; ++a) {
        if (dof[a] < 1) throw ConfigError("resolution must be positive");
        mesh.push_back(mesh_for_dof(scheme, dof[a], p.spec.bc.front()[a]));
    }
    return mesh;
}

GridField perturbation(CoefficientStream& stream, double scale, const std::vector<Eigen::VectorXd>& coords) {
    if (!(scale >= 0.0)) throw std::invalid_argument("perturbation: scale must be non-negative");
    if (coords.empty() || coords.size() > 3) throw std::invalid_argument("perturbation: dimension must be 1, 2 or 3");
    constexpr int kTerms = 5;
    const std::size_t dim = coords.size();

    std::vector<Eigen::Index> shape;
    for (const auto& c : coords) shape.push_back(c.size());
    GridField field(shape);

    // Powers x^0..x^4 of every node, per axis.
    std::vector<Eigen::MatrixXd> powers;
    for (const auto& c : coords) {
        Eigen::MatrixXd pw(c.size(), kTerms);
        pw.col(0).setOnes();
        for (int e = 1; e < kTerms; ++e) pw.col(e) = pw.col(e - 1).cwiseProduct(c);
        powers.push_back(std::move(pw));
    }

    for (int attempt = 0; attempt < 2; ++attempt) {
        // a[i + 5 j + 25 k]; drawn with i as the slowest exponent (lexicographic in (i, j, k)).
        const int count = dim == 1 ? kTerms : dim == 2 ? kTerms * kTerms : kTerms * kTerms * kTerms;
        std::vector<double> a(static_cast<std::size_t>(count));
        const int nj = dim > 1 ? kTerms : 1;
        const int nk = dim > 2 ? kTerms : 1;
        for (int i = 0; i < kTerms; ++i)
            for (int j = 0; j < nj; ++j)
                for (int k = 0; k < nk; ++k) a[static_cast<std::size_t>(i + kTerms * (j + kTerms * k))] = stream.next();

        Eigen::VectorXd& v = field.values();
        const Eigen::Index n0 = shape[0];
        const Eigen::Index n1 = dim > 1 ? shape[1] : 1;
        const Eigen::Index n2 = dim > 2 ? shape[2] : 1;
        for (Eigen::Index q2 = 0; q2 < n2; ++q2)
            for (Eigen::Index q1 = 0; q1 < n1; ++q1)
                for (Eigen::Index q0 = 0; q0 < n0; ++q0) {
                    double sum = 0.0;
                    for (int k = 0; k < nk; ++k) {
                        const double zk = dim > 2 ? powers[2](q2, k) : 1.0;
                        for (int j = 0; j < nj; ++j) {
                            const double yj = dim > 1 ? powers[1](q1, j) : 1.0;
                            for (int i = 0; i < kTerms; ++i)
                                sum += a[static_cast<std::size_t>(i + kTerms * (j + kTerms * k))] * powers[0](q0, i) *
                                       yj * zk;
                        }
                    }
                    v(q0 + n0 * (q1 + n1 * q2)) = sum;
                }
        const double peak = v.cwiseAbs().maxCoeff();
        if (peak > 0.0) {
            v *= scale / peak;
            return field;
        }
    }
    throw NumericalError("perturbation: polynomial vanished on the grid twice");
}

GridField perturbation(int dim, std::uint64_t seed, double scale, const std::vector<Eigen::VectorXd>& coords) {
    if (static_cast<std::size_t>(dim) != coords.size())
        throw std::invalid_argument("perturbation: dimension does not match the grid");
    CoefficientStream stream(seed);
    return perturbation(stream, scale, coords);
}

State perturbation_state(const DiscreteProblem& problem, std::uint64_t seed, double scale) {
    CoefficientStream stream(seed);
    State out;
    for (int c = 0; c < problem.components(); ++c) out.push_back(perturbation(stream, scale, problem.coords));
    return out;
}

std::vector<BumpPattern> gray_scott_patterns() {
    return {
        {"center_spot", {{0.5, 0.5}}},
        {"corner_spot", {{0.0, 0.0}}},
        {"edge_spot", {{0.5, 0.0}}},
        {"two_corners", {{0.0, 0.0}, {1.0, 1.0}}},
        {"four_corners", {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}},
        {"two_edges", {{0.5, 0.0}, {0.5, 1.0}}},
        {"stripe", {{0.5, 0.0}, {0.5, 0.25}, {0.5, 0.5}, {0.5, 0.75}, {0.5, 1.0}}},
        {"center_and_corners", {{0.5, 0.5}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}},
    };
}

State gray_scott_initial_state(const DiscreteProblem& problem, const BumpPattern& pattern) {
    if (problem.components() != 2 || problem.spec.dim() != 2)
        throw std::invalid_argument("gray_scott_initial_state: needs a two-component 2D problem");
    return sample(problem, [&](std::span<const double> x, std::span<double> out) {
        const double a = pattern.height * bump_sum(pattern, x[0], x[1]);
        out[0] = a;
        out[1] = std::max(0.0, 1.0 - 2.0 * a);
    });
}

}  // namespace qnsolve
