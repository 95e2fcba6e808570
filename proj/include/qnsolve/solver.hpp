#pragma once

#include "qnsolve/discretize.hpp"
#include "qnsolve/tensor.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qnsolve {

/// f_c(x, u_1..u_m) for every component c, written into `f`.
using ReactionFn = std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> f)>;
/// Row-major m x m Jacobian, jac[c*m + d] = df_c/du_d.
using JacobianFn = std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> jac)>;
/// Per-component field of x only (manufactured right-hand sides, exact solutions).
using PointFn = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Continuous problem  -D_c Lap u_c + lambda_c u_c + f_c(x, u) = 0  with per-axis boundary data.
struct ProblemSpec {
    std::string name;
    std::vector<Interval> domain;  ///< one interval per axis, x first
    int components = 1;
    std::vector<double> shift;                  ///< lambda_c
    std::vector<double> diffusion;              ///< D_c, defaults to 1
    std::vector<std::vector<AxisBoundary>> bc;  ///< [component][axis]
    ReactionFn reaction;
    JacobianFn jacobian;
    PointFn source;  ///< optional x-only term added to f (evaluated once per discretization)
    PointFn exact;   ///< optional exact solution

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(domain.size()); }
    /// Fills defaults and throws std::invalid_argument on inconsistent data.
    void validate();
};

using State = std::vector<GridField>;

/// A ProblemSpec bound to a tensor mesh: operators, fixed load terms and quadrature weights.
struct DiscreteProblem {
    ProblemSpec spec;
    Scheme scheme;
    std::vector<int> mesh;                 ///< cells or intervals per axis
    std::vector<TensorOperator> ops;       ///< one per component, sharing axes
    std::vector<GridField> fixed;          ///< boundary load + source, per component
    std::vector<Eigen::VectorXd> coords;   ///< unknown coordinates per axis
    Eigen::VectorXd weights;               ///< tensor-product norm weights, x fastest

    [[nodiscard]] std::vector<Eigen::Index> shape() const { return ops.front().shape(); }
    [[nodiscard]] Eigen::Index points() const { return weights.size(); }
    [[nodiscard]] int components() const noexcept { return spec.components; }
    [[nodiscard]] std::vector<double> point(Eigen::Index flat) const;
    [[nodiscard]] State zeros() const;
};

/// Builds operators (with eigendecompositions when `with_eigen`) and fixed load terms.
[[nodiscard]] DiscreteProblem discretize_problem(ProblemSpec spec, const Scheme& scheme, std::vector<int> mesh,
                                                 bool with_eigen = true);

/// Samples a per-component point function on the unknowns.
[[nodiscard]] State sample(const DiscreteProblem& problem, const PointFn& fn);

/// Mass-weighted inner product and norm over all components.
[[nodiscard]] double inner(const DiscreteProblem& problem, const State& a, const State& b);
[[nodiscard]] double l2_norm(const DiscreteProblem& problem, const State& a);
[[nodiscard]] double l2_distance(const DiscreteProblem& problem, const State& a, const State& b);

/// F^h(U) = A_h U + N_h(U) + boundary/source terms, per component.
/// Throws EvaluationError if the nonlinearity produces a non-finite value.
[[nodiscard]] State residual(const DiscreteProblem& problem, const State& u);

struct SpectrumBounds {
    double min = 0.0;
    double max = 0.0;
    bool complex = false;  ///< some point block had complex eigenvalues; real parts used
};

/// Eigenvalues of a 2x2 block [[a, b], [c, d]], closed form. Complex pairs report their real part twice.
[[nodiscard]] SpectrumBounds block_eigenvalues_2x2(double a, double b, double c, double d);

/// Extreme eigenvalues of the pointwise nonlinear Jacobian over the grid.
[[nodiscard]] SpectrumBounds nonlinear_jacobian_eig_bounds(const DiscreteProblem& problem, const State& u);

struct BetaStrategy {
    enum class Kind { midpoint, sum, max_eig, min_eig, fixed };
    Kind kind = Kind::midpoint;
    double value = 0.0;

    static BetaStrategy midpoint() { return {Kind::midpoint, 0.0}; }
    static BetaStrategy sum() { return {Kind::sum, 0.0}; }
    static BetaStrategy max_eig() { return {Kind::max_eig, 0.0}; }
    static BetaStrategy min_eig() { return {Kind::min_eig, 0.0}; }
    static BetaStrategy fixed(double v) { return {Kind::fixed, v}; }

    /// Accepts midpoint | sum | max | min | fixed:<v>.
    static BetaStrategy parse(const std::string& text);
    [[nodiscard]] std::string label() const;
    [[nodiscard]] double choose(const SpectrumBounds& bounds) const;
};

struct SolveOptions {
    BetaStrategy beta = BetaStrategy::midpoint();
    double tol = 1e-10;
    int max_iter = 10000;
    double damping = 1.0;
    double divergence_limit = 1e12;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  ///< discrete L2 norm of F^h(U_n), n = 0..iterations
    std::vector<double> beta_history;
    std::vector<double> lambda_history;  ///< eigen mode only
    std::vector<double> norm_history;    ///< eigen mode only: ||U_n|| after normalization
    bool complex_spectrum = false;
    State solution;
    double wall_seconds = 0.0;

    [[nodiscard]] double final_residual() const {
        return residual_history.empty() ? 0.0 : residual_history.back();
    }
};

/// U_{n+1} = U_n - damping * (A_h + beta_n I)^{-1} F^h(U_n), one shared beta_n for all components.
[[nodiscard]] SolveReport quasi_newton_solve(const DiscreteProblem& problem, State u0, const SolveOptions& options);

/// Largest total unknown count accepted by the dense Newton reference.
inline constexpr Eigen::Index kNewtonDenseLimit = 20000;

/// Classical Newton with the dense Jacobian A_h + (N_h)_U and an LU solve.
[[nodiscard]] SolveReport newton_solve(const DiscreteProblem& problem, State u0, const SolveOptions& options);

/// Normalized quasi-Newton iteration for  -Lap u + f(u) = lambda u  with a Rayleigh-quotient lambda.
[[nodiscard]] SolveReport eigen_mode_solve(const DiscreteProblem& problem, State u0, const SolveOptions& options);

struct ContractionBound {
    double beta = 0.0;
    double g_value = 0.0;
};

/// max_mu |beta - mu| / min_lambda |lambda + beta| for explicit spectra.
[[nodiscard]] double contraction_ratio(std::span<const double> nonlinear_spectrum,
                                       std::span<const double> operator_spectrum, double beta);

/// Two-branch closed form of the bound for SPD spectra, split at the midpoint of [mu_min, mu_max].
[[nodiscard]] double contraction_ratio_piecewise(double mu_min, double mu_max, double lambda_min, double beta);

/// g(beta) for the problem at iterate u, composing the operator spectrum from the axes.
[[nodiscard]] ContractionBound contraction_bound(const DiscreteProblem& problem, const State& u, double beta);

}  // namespace qnsolve
