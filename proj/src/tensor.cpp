#include "qnsolve/tensor.hpp"

#include "qnsolve/errors.hpp"
#include "qnsolve/jacobi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qnsolve {

namespace {

Eigen::Index product(const std::vector<Eigen::Index>& shape) {
    Eigen::Index n = 1;
    for (Eigen::Index e : shape) n *= e;
    return n;
}

void check_shape(const std::vector<Eigen::Index>& shape) {
    if (shape.empty() || shape.size() > 3) throw std::invalid_argument("GridField: rank must be 1, 2 or 3");
    for (Eigen::Index e : shape)
        if (e < 1) throw std::invalid_argument("GridField: extents must be positive");
}

std::string shape_text(const std::vector<Eigen::Index>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + ")";
}

}  // namespace

GridField::GridField(std::vector<Eigen::Index> shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    values_ = Eigen::VectorXd::Zero(product(shape_));
}

GridField::GridField(std::vector<Eigen::Index> shape, Eigen::VectorXd values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    check_shape(shape_);
    if (values_.size() != product(shape_))
        throw std::invalid_argument("GridField: value count does not match shape " + shape_text(shape_));
}

GridField GridField::constant(const std::vector<Eigen::Index>& shape, double value) {
    GridField f(shape);
    f.values_.setConstant(value);
    return f;
}

Eigen::Map<Eigen::MatrixXd> GridField::as_matrix() {
    if (rank() != 2) throw std::invalid_argument("GridField::as_matrix: rank-2 field required");
    return {values_.data(), shape_[0], shape_[1]};
}

Eigen::Map<const Eigen::MatrixXd> GridField::as_matrix() const {
    if (rank() != 2) throw std::invalid_argument("GridField::as_matrix: rank-2 field required");
    return {values_.data(), shape_[0], shape_[1]};
}

std::vector<Eigen::Index> TensorOperator::shape() const {
    std::vector<Eigen::Index> s;
    for (const auto& axis : axes) s.push_back(axis->size());
    return s;
}

Eigen::Index TensorOperator::total_size() const { return product(shape()); }

bool TensorOperator::has_eigen() const {
    for (const auto& axis : axes)
        if (!axis || !axis->eigen) return false;
    return !axes.empty();
}

Eigen::VectorXd TensorOperator::spectrum() const {
    if (!has_eigen()) throw InvalidStateError("TensorOperator::spectrum: eigendecomposition not attached");
    const auto s = shape();
    const Eigen::Index n0 = s[0];
    const Eigen::Index n1 = s.size() > 1 ? s[1] : 1;
    const Eigen::Index n2 = s.size() > 2 ? s[2] : 1;
    Eigen::VectorXd out(n0 * n1 * n2);
    for (Eigen::Index k = 0; k < n2; ++k)
        for (Eigen::Index j = 0; j < n1; ++j)
            for (Eigen::Index i = 0; i < n0; ++i) {
                double sum = axes[0]->eigen->values(i);
                if (s.size() > 1) sum += axes[1]->eigen->values(j);
                if (s.size() > 2) sum += axes[2]->eigen->values(k);
                out(i + n0 * (j + n1 * k)) = diffusion * sum + shift;
            }
    return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a) {
    Eigen::MatrixXd out(b.rows() * a.rows(), b.cols() * a.cols());
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            out.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = b(i, j) * a;
    return out;
}

Eigen::MatrixXd TensorOperator::assemble_dense() const {
    if (axes.empty()) throw InvalidStateError("TensorOperator: no axes");
    const auto s = shape();
    const Eigen::Index total = total_size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total, total);
    for (std::size_t axis = 0; axis < s.size(); ++axis) {
        // I ⊗ ... ⊗ H_axis ⊗ ... ⊗ I with the x factor rightmost.
        Eigen::MatrixXd term = Eigen::MatrixXd::Identity(1, 1);
        for (std::size_t f = 0; f < s.size(); ++f) {
            const Eigen::MatrixXd factor =
                f == axis ? axes[f]->h_matrix : Eigen::MatrixXd::Identity(s[f], s[f]).eval();
            term = kron(factor, term);
        }
        a += term;
    }
    a *= diffusion;
    a.diagonal().array() += shift;
    return a;
}

Operator1D attach_eigendecomposition(Operator1D op) {
    const Eigen::Index n = op.size();
    if (op.mass_diag.size() != n || op.symmetrizer.size() != n)
        throw InvalidStateError("attach_eigendecomposition: operator is not assembled");
    if ((op.mass_diag.array() <= 0.0).any() || (op.symmetrizer.array() <= 0.0).any())
        throw InvalidStateError("attach_eigendecomposition: non-positive mass entry");

    const Eigen::VectorXd root = op.symmetrizer.cwiseSqrt();
    const Eigen::VectorXd inv_root = root.cwiseInverse();
    const Eigen::MatrixXd sym = root.asDiagonal() * op.h_matrix * inv_root.asDiagonal();
    const SymmetricEigenResult eig = jacobi_eigen_split(sym);

    AxisEigen out;
    out.values = eig.values;
    out.vectors = inv_root.asDiagonal() * eig.vectors;
    out.inv_vectors = eig.vectors.transpose() * root.asDiagonal();
    op.eigen = std::move(out);
    return op;
}

GridField apply_along_axis(const Eigen::MatrixXd& m, int axis, const GridField& x) {
    const int r = x.rank();
    if (axis < 0 || axis >= r) throw std::invalid_argument("apply_along_axis: axis out of range");
    if (m.cols() != x.extent(axis))
        throw std::invalid_argument("apply_along_axis: matrix has " + std::to_string(m.cols()) +
                                    " columns, axis extent is " + std::to_string(x.extent(axis)));

    std::vector<Eigen::Index> out_shape = x.shape();
    out_shape[static_cast<std::size_t>(axis)] = m.rows();
    GridField out(out_shape);

    const Eigen::Index n0 = x.extent(0);
    if (axis == 0) {
        const Eigen::Index rest = x.size() / n0;
        Eigen::Map<const Eigen::MatrixXd> in(x.values().data(), n0, rest);
        Eigen::Map<Eigen::MatrixXd> dst(out.values().data(), m.rows(), rest);
        dst.noalias() = m * in;
    } else if (axis == r - 1) {
        const Eigen::Index before = x.size() / x.extent(axis);
        Eigen::Map<const Eigen::MatrixXd> in(x.values().data(), before, x.extent(axis));
        Eigen::Map<Eigen::MatrixXd> dst(out.values().data(), before, m.rows());
        dst.noalias() = in * m.transpose();
    } else {
        // Middle axis of a rank-3 field: one matrix product per z slice.
        const Eigen::Index n1 = x.extent(1);
        const Eigen::Index n2 = x.extent(2);
        for (Eigen::Index k = 0; k < n2; ++k) {
            Eigen::Map<const Eigen::MatrixXd> in(x.values().data() + k * n0 * n1, n0, n1);
            Eigen::Map<Eigen::MatrixXd> dst(out.values().data() + k * n0 * m.rows(), n0, m.rows());
            dst.noalias() = in * m.transpose();
        }
    }
    return out;
}

GridField apply_kron_2d(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const GridField& x) {
    if (x.rank() != 2) throw std::invalid_argument("apply_kron_2d: rank-2 field required");
    return apply_along_axis(a, 0, apply_along_axis(b, 1, x));
}

GridField apply_kron_3d(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                        const GridField& x) {
    if (x.rank() != 3) throw std::invalid_argument("apply_kron_3d: rank-3 field required");
    return apply_along_axis(a, 0, apply_along_axis(b, 1, apply_along_axis(c, 2, x)));
}

GridField apply_operator(const TensorOperator& op, const GridField& u) {
    if (op.axes.empty()) throw InvalidStateError("apply_operator: operator has no axes");
    if (u.shape() != op.shape())
        throw std::invalid_argument("apply_operator: field shape " + shape_text(u.shape()) +
                                    " does not match operator " + shape_text(op.shape()));
    GridField out(u.shape());
    for (int axis = 0; axis < op.dim(); ++axis)
        out.values() += apply_along_axis(op.axes[static_cast<std::size_t>(axis)]->h_matrix, axis, u).values();
    if (op.diffusion != 1.0) out.values() *= op.diffusion;
    if (op.shift != 0.0) out.values() += op.shift * u.values();
    return out;
}

DenominatorProbe smallest_denominator(const TensorOperator& op, double beta) {
    const Eigen::VectorXd spec = op.spectrum();
    const auto s = op.shape();
    Eigen::Index best = 0;
    double best_mag = std::numeric_limits<double>::infinity();
    for (Eigen::Index q = 0; q < spec.size(); ++q) {
        const double mag = std::abs(spec(q) + beta);
        if (mag < best_mag) {
            best_mag = mag;
            best = q;
        }
    }
    const Eigen::Index n0 = s[0];
    const Eigen::Index n1 = s.size() > 1 ? s[1] : 1;
    std::array<std::size_t, 3> index{static_cast<std::size_t>(best % n0), static_cast<std::size_t>((best / n0) % n1),
                                     static_cast<std::size_t>(best / (n0 * n1))};
    return {best_mag, spec(best) + beta, index};
}

GridField fast_shift_solve(const TensorOperator& op, double beta, const GridField& rhs) {
    if (!op.has_eigen()) throw InvalidStateError("fast_shift_solve: eigendecomposition not attached");
    if (rhs.shape() != op.shape())
        throw std::invalid_argument("fast_shift_solve: rhs shape " + shape_text(rhs.shape()) +
                                    " does not match operator " + shape_text(op.shape()));
    const int d = op.dim();

    // Into the eigenbasis: z, then y, then x.
    GridField coeff = rhs;
    for (int axis = d - 1; axis >= 0; --axis)
        coeff = apply_along_axis(op.axes[static_cast<std::size_t>(axis)]->eigen->inv_vectors, axis, coeff);

    const auto s = op.shape();
    const Eigen::Index n0 = s[0];
    const Eigen::Index n1 = d > 1 ? s[1] : 1;
    const Eigen::Index n2 = d > 2 ? s[2] : 1;
    const Eigen::VectorXd& lx = op.axes[0]->eigen->values;
    double* c = coeff.values().data();
    for (Eigen::Index k = 0; k < n2; ++k) {
        const double lz = d > 2 ? op.axes[2]->eigen->values(k) : 0.0;
        for (Eigen::Index j = 0; j < n1; ++j) {
            const double lyz = lz + (d > 1 ? op.axes[1]->eigen->values(j) : 0.0);
            double* line = c + n0 * (j + n1 * k);
            for (Eigen::Index i = 0; i < n0; ++i) {
                const double denom = op.diffusion * (lx(i) + lyz) + op.shift + beta;
                if (!(std::abs(denom) > kSingularShiftGuard))
                    throw SingularShiftError({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                              static_cast<std::size_t>(k)},
                                             denom);
                line[i] /= denom;
            }
        }
    }

    for (int axis = d - 1; axis >= 0; --axis)
        coeff = apply_along_axis(op.axes[static_cast<std::size_t>(axis)]->eigen->vectors, axis, coeff);
    return coeff;
}

}  // namespace qnsolve
