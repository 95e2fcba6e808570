#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace qnsolve {

enum class BcKind { dirichlet, neumann };

/// alpha1 * du/dn + alpha2 * u = alpha3 on one end of an axis.
/// Only the pure Dirichlet (alpha1 = 0) and pure Neumann (alpha2 = 0) cases are supported.
struct BoundaryCondition {
    double alpha1 = 0.0;
    double alpha2 = 1.0;
    double alpha3 = 0.0;

    static BoundaryCondition dirichlet(double value = 0.0) { return {0.0, 1.0, value}; }
    static BoundaryCondition neumann(double flux = 0.0) { return {1.0, 0.0, flux}; }

    /// Throws std::invalid_argument unless exactly one of alpha1, alpha2 is zero.
    void validate() const;
    [[nodiscard]] BcKind kind() const;
    /// alpha3/alpha2 for Dirichlet, alpha3/alpha1 (outward flux) for Neumann.
    [[nodiscard]] double boundary_value() const;
};

struct AxisBoundary {
    BoundaryCondition left;
    BoundaryCondition right;

    static AxisBoundary dirichlet(double left = 0.0, double right = 0.0) {
        return {BoundaryCondition::dirichlet(left), BoundaryCondition::dirichlet(right)};
    }
    static AxisBoundary neumann(double left = 0.0, double right = 0.0) {
        return {BoundaryCondition::neumann(left), BoundaryCondition::neumann(right)};
    }
    [[nodiscard]] int dirichlet_ends() const;
    [[nodiscard]] bool same_kinds(const AxisBoundary& other) const;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    [[nodiscard]] double length() const { return hi - lo; }
};

enum class SchemeKind { sem, fdm };

struct Scheme {
    SchemeKind kind = SchemeKind::sem;
    int degree = 2;  ///< polynomial degree k of Q^k; ignored for fdm

    static Scheme sem(int k) { return {SchemeKind::sem, k}; }
    static Scheme fdm() { return {SchemeKind::fdm, 0}; }
    /// "fdm" or "sem:<k>".
    [[nodiscard]] std::string label() const;
    static Scheme parse(const std::string& text);
};

/// Spectral decomposition H = T diag(values) T^{-1} of a 1D operator.
struct AxisEigen {
    Eigen::MatrixXd vectors;      ///< T
    Eigen::VectorXd values;       ///< ascending
    Eigen::MatrixXd inv_vectors;  ///< T^{-1}
};

/// One axis of a tensor-product discretization, restricted to its active degrees of freedom.
struct Operator1D {
    Scheme scheme;
    int mesh = 0;  ///< cells (sem) or grid intervals (fdm)
    Interval interval;
    AxisBoundary bc;

    Eigen::VectorXd all_nodes;         ///< every grid node, boundary included
    std::vector<Eigen::Index> active;  ///< positions of the unknowns inside all_nodes
    Eigen::VectorXd nodes;             ///< physical coordinates of the unknowns

    Eigen::VectorXd mass_diag;  ///< diagonal of M
    Eigen::MatrixXd stiffness;  ///< S
    Eigen::MatrixXd h_matrix;   ///< H = M^{-1} S

    /// Positive diagonal W with W H symmetric; equals mass_diag for sem.
    Eigen::VectorXd symmetrizer;
    /// Weights of the discrete L2 inner product along this axis.
    Eigen::VectorXd norm_weights;

    /// Load contribution per unit boundary datum at the left/right end (length n).
    /// Dirichlet: the eliminated columns of the full H. Neumann: the flux term.
    Eigen::VectorXd left_load;
    Eigen::VectorXd right_load;

    std::optional<AxisEigen> eigen;

    [[nodiscard]] Eigen::Index size() const noexcept { return nodes.size(); }
    [[nodiscard]] double cell_width() const { return interval.length() / mesh; }
};

/// Q^k spectral element operator on `cells` uniform cells with (k+1)-point Gauss-Lobatto quadrature.
[[nodiscard]] Operator1D sem_operator_1d(int degree, int cells, Interval interval, const AxisBoundary& bc);

/// Second-order central differences on n uniform intervals; ghost points at Neumann ends.
[[nodiscard]] Operator1D fdm_operator_1d(int intervals, Interval interval, const AxisBoundary& bc);

[[nodiscard]] Operator1D make_operator_1d(const Scheme& scheme, int mesh, Interval interval, const AxisBoundary& bc);

/// Smallest mesh parameter whose active unknown count is at least `dof`.
[[nodiscard]] int mesh_for_dof(const Scheme& scheme, int dof, const AxisBoundary& bc);

/// Additive correction to the residual carrying nonhomogeneous boundary data, on the
/// tensor grid of `axes` (x fastest). `bcs[a]` holds the data of axis a; `scale` multiplies
/// the result (diffusion coefficient). Zero when every alpha3 vanishes.
[[nodiscard]] Eigen::VectorXd load_adjustment(const std::vector<const Operator1D*>& axes,
                                              const std::vector<AxisBoundary>& bcs, double scale = 1.0);

}  // namespace qnsolve
