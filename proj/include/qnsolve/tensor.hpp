#pragma once

#include "qnsolve/discretize.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace qnsolve {

/// Values on a tensor grid of rank 1..3, stored with the x index fastest (vec ordering).
class GridField {
public:
    GridField() = default;
    explicit GridField(std::vector<Eigen::Index> shape);
    GridField(std::vector<Eigen::Index> shape, Eigen::VectorXd values);

    static GridField zeros(const std::vector<Eigen::Index>& shape) { return GridField(shape); }
    static GridField constant(const std::vector<Eigen::Index>& shape, double value);

    [[nodiscard]] int rank() const noexcept { return static_cast<int>(shape_.size()); }
    [[nodiscard]] const std::vector<Eigen::Index>& shape() const noexcept { return shape_; }
    [[nodiscard]] Eigen::Index extent(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

    [[nodiscard]] Eigen::VectorXd& values() noexcept { return values_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }

    double& operator()(Eigen::Index i, Eigen::Index j = 0, Eigen::Index k = 0) { return values_(flat(i, j, k)); }
    double operator()(Eigen::Index i, Eigen::Index j = 0, Eigen::Index k = 0) const { return values_(flat(i, j, k)); }

    /// 2D view as an N_x x N_y column-major matrix.
    [[nodiscard]] Eigen::Map<Eigen::MatrixXd> as_matrix();
    [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> as_matrix() const;

    [[nodiscard]] bool same_shape(const GridField& other) const noexcept { return shape_ == other.shape_; }

private:
    [[nodiscard]] Eigen::Index flat(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
        const Eigen::Index n0 = shape_.empty() ? 1 : shape_[0];
        const Eigen::Index n1 = shape_.size() > 1 ? shape_[1] : 1;
        return i + n0 * (j + n1 * k);
    }

    std::vector<Eigen::Index> shape_;
    Eigen::VectorXd values_;
};

/// Kronecker-sum operator  D * (sum over axes of H_axis acting along that axis) + shift * I.
struct TensorOperator {
    std::vector<std::shared_ptr<const Operator1D>> axes;  ///< x, then y, then z
    double shift = 0.0;                                   ///< linear reaction coefficient lambda
    double diffusion = 1.0;                               ///< scales the Laplacian part

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(axes.size()); }
    [[nodiscard]] std::vector<Eigen::Index> shape() const;
    [[nodiscard]] Eigen::Index total_size() const;
    [[nodiscard]] bool has_eigen() const;
    /// Every eigenvalue D*(Lx_i + Ly_j + Lz_k) + shift, x index fastest.
    [[nodiscard]] Eigen::VectorXd spectrum() const;
    /// Dense matrix of the operator (small sizes only).
    [[nodiscard]] Eigen::MatrixXd assemble_dense() const;
};

/// Diagonalizes H through the symmetric similarity W^{1/2} H W^{-1/2} (W = mass for sem)
/// using Jacobi rotations. Throws InvalidStateError for a non-positive weight.
[[nodiscard]] Operator1D attach_eigendecomposition(Operator1D op);

/// A * X * B^T, i.e. (B kron A) vec(X), without forming the Kronecker product.
[[nodiscard]] GridField apply_kron_2d(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GridField& x);

/// (C kron B kron A) vec(X), contracting z first, then y, then x.
[[nodiscard]] GridField apply_kron_3d(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                                      const GridField& x);

/// Applies a square matrix along one axis of the field.
[[nodiscard]] GridField apply_along_axis(const Eigen::MatrixXd& m, int axis, const GridField& x);

[[nodiscard]] GridField apply_operator(const TensorOperator& op, const GridField& u);

/// Absolute size below which a diagonalized denominator is treated as singular.
inline constexpr double kSingularShiftGuard = 1e-12;

/// Solves (A_h + beta I) x = rhs through the per-axis eigenbases and an element-wise division.
/// Throws SingularShiftError when any denominator has magnitude <= kSingularShiftGuard.
[[nodiscard]] GridField fast_shift_solve(const TensorOperator& op, double beta, const GridField& rhs);

/// Smallest |D*Lambda_sum + shift + beta| over the composed spectrum, with its index.
struct DenominatorProbe {
    double magnitude;
    double value;
    std::array<std::size_t, 3> index;
};
[[nodiscard]] DenominatorProbe smallest_denominator(const TensorOperator& op, double beta);

/// Explicit Kronecker product, for tests and dense reference paths.
[[nodiscard]] Eigen::MatrixXd kron(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a);

}  // namespace qnsolve
