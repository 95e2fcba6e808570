#include "qnsolve/discretize.hpp"

#include "qnsolve/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace qnsolve {

void BoundaryCondition::validate() const {
    if (alpha1 == 0.0 && alpha2 == 0.0) throw std::invalid_argument("boundary condition: alpha1 and alpha2 both zero");
    if (alpha1 != 0.0 && alpha2 != 0.0)
        throw std::invalid_argument("boundary condition: mixed Robin data is not supported");
    if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || !std::isfinite(alpha3))
        throw std::invalid_argument("boundary condition: non-finite coefficient");
}

BcKind BoundaryCondition::kind() const {
    validate();
    return alpha1 == 0.0 ? BcKind::dirichlet : BcKind::neumann;
}

double BoundaryCondition::boundary_value() const {
    return kind() == BcKind::dirichlet ? alpha3 / alpha2 : alpha3 / alpha1;
}

int AxisBoundary::dirichlet_ends() const {
    return (left.kind() == BcKind::dirichlet ? 1 : 0) + (right.kind() == BcKind::dirichlet ? 1 : 0);
}

bool AxisBoundary::same_kinds(const AxisBoundary& other) const {
    return left.kind() == other.left.kind() && right.kind() == other.right.kind();
}

std::string Scheme::label() const {
    return kind == SchemeKind::fdm ? std::string("fdm") : "sem:" + std::to_string(degree);
}

Scheme Scheme::parse(const std::string& text) {
    if (text == "fdm") return fdm();
    if (text.rfind("sem:", 0) == 0) {
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(text.substr(4), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 4 || k < 1)
            throw std::invalid_argument("scheme: bad polynomial degree in '" + text + "'");
        return sem(k);
    }
    if (text == "sem") return sem(2);
    throw std::invalid_argument("scheme: expected 'fdm' or 'sem:<k>', got '" + text + "'");
}

namespace {

void check_interval(Interval interval) {
    if (!(interval.hi > interval.lo) || !std::isfinite(interval.lo) || !std::isfinite(interval.hi))
        throw std::invalid_argument("operator: interval must satisfy a < b");
}

// Restricts the full-grid H to the unknowns and records eliminated Dirichlet columns.
void finish_operator(Operator1D& op, const Eigen::MatrixXd& s_full, const Eigen::VectorXd& m_full) {
    const Eigen::Index full = op.all_nodes.size();
    const bool left_dirichlet = op.bc.left.kind() == BcKind::dirichlet;
    const bool right_dirichlet = op.bc.right.kind() == BcKind::dirichlet;

    op.active.clear();
    for (Eigen::Index i = 0; i < full; ++i) {
        if ((i == 0 && left_dirichlet) || (i == full - 1 && right_dirichlet)) continue;
        op.active.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(op.active.size());
    if (n < 1) throw std::invalid_argument("operator: mesh too coarse, no unknowns left");

    op.nodes.resize(n);
    op.mass_diag.resize(n);
    op.stiffness.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        op.nodes(r) = op.all_nodes(op.active[r]);
        op.mass_diag(r) = m_full(op.active[r]);
        for (Eigen::Index c = 0; c < n; ++c) op.stiffness(r, c) = s_full(op.active[r], op.active[c]);
    }
    op.h_matrix = op.mass_diag.cwiseInverse().asDiagonal() * op.stiffness;

    auto column_load = [&](Eigen::Index boundary_node) {
        Eigen::VectorXd load(n);
        for (Eigen::Index r = 0; r < n; ++r) load(r) = s_full(op.active[r], boundary_node) / op.mass_diag(r);
        return load;
    };
    op.left_load = Eigen::VectorXd::Zero(n);
    op.right_load = Eigen::VectorXd::Zero(n);
    if (left_dirichlet) op.left_load = column_load(0);
    if (right_dirichlet) op.right_load = column_load(full - 1);
}

}  // namespace

Operator1D sem_operator_1d(int degree, int cells, Interval interval, const AxisBoundary& bc) {
    if (degree < 1) throw std::invalid_argument("sem_operator_1d: degree must be >= 1");
    if (cells < 1) throw std::invalid_argument("sem_operator_1d: need at least one cell");
    check_interval(interval);
    bc.left.validate();
    bc.right.validate();

    Operator1D op;
    op.scheme = Scheme::sem(degree);
    op.mesh = cells;
    op.interval = interval;
    op.bc = bc;

    const QuadratureRule rule = gauss_lobatto(degree + 1);
    const Eigen::MatrixXd d = diff_matrix(rule);
    const double h = interval.length() / cells;
    const Eigen::MatrixXd k_ref = d.transpose() * rule.weights.asDiagonal() * d;

    const Eigen::Index full = static_cast<Eigen::Index>(cells) * degree + 1;
    op.all_nodes.resize(full);
    Eigen::MatrixXd s_full = Eigen::MatrixXd::Zero(full, full);
    Eigen::VectorXd m_full = Eigen::VectorXd::Zero(full);
    for (int e = 0; e < cells; ++e) {
        const double left = interval.lo + e * h;
        const Eigen::Index offset = static_cast<Eigen::Index>(e) * degree;
        for (int a = 0; a <= degree; ++a) {
            op.all_nodes(offset + a) = left + 0.5 * (rule.points(a) + 1.0) * h;
            m_full(offset + a) += rule.weights(a) * 0.5 * h;
            for (int b = 0; b <= degree; ++b) s_full(offset + a, offset + b) += k_ref(a, b) * 2.0 / h;
        }
    }
    op.all_nodes(0) = interval.lo;
    op.all_nodes(full - 1) = interval.hi;

    finish_operator(op, s_full, m_full);
    op.symmetrizer = op.mass_diag;
    op.norm_weights = op.mass_diag;
    const Eigen::Index n = op.size();
    // Neumann boundary integral of the flux against the end basis function, divided by the lumped mass.
    if (bc.left.kind() == BcKind::neumann) op.left_load(0) = -1.0 / op.mass_diag(0);
    if (bc.right.kind() == BcKind::neumann) op.right_load(n - 1) = -1.0 / op.mass_diag(n - 1);
    return op;
}

Operator1D fdm_operator_1d(int intervals, Interval interval, const AxisBoundary& bc) {
    if (intervals < 2) throw std::invalid_argument("fdm_operator_1d: need at least 2 intervals");
    check_interval(interval);
    bc.left.validate();
    bc.right.validate();

    Operator1D op;
    op.scheme = Scheme::fdm();
    op.mesh = intervals;
    op.interval = interval;
    op.bc = bc;

    const double h = interval.length() / intervals;
    const double inv_h2 = 1.0 / (h * h);
    const Eigen::Index full = intervals + 1;
    op.all_nodes = Eigen::VectorXd::LinSpaced(full, interval.lo, interval.hi);

    Eigen::MatrixXd s_full = Eigen::MatrixXd::Zero(full, full);
    for (Eigen::Index i = 1; i + 1 < full; ++i) {
        s_full(i, i - 1) = -inv_h2;
        s_full(i, i) = 2.0 * inv_h2;
        s_full(i, i + 1) = -inv_h2;
    }
    // Ghost-point rows; only used when the end is Neumann (Dirichlet ends are dropped).
    s_full(0, 0) = 2.0 * inv_h2;
    s_full(0, 1) = -2.0 * inv_h2;
    s_full(full - 1, full - 1) = 2.0 * inv_h2;
    s_full(full - 1, full - 2) = -2.0 * inv_h2;

    finish_operator(op, s_full, Eigen::VectorXd::Ones(full));

    const Eigen::Index n = op.size();
    op.symmetrizer = Eigen::VectorXd::Ones(n);
    op.norm_weights = Eigen::VectorXd::Constant(n, h);
    if (bc.left.kind() == BcKind::neumann) {
        op.symmetrizer(0) = 0.5;
        op.left_load(0) = -2.0 / h;
    }
    if (bc.right.kind() == BcKind::neumann) {
        op.symmetrizer(n - 1) = 0.5;
        op.right_load(n - 1) = -2.0 / h;
    }
    return op;
}

Operator1D make_operator_1d(const Scheme& scheme, int mesh, Interval interval, const AxisBoundary& bc) {
    return scheme.kind == SchemeKind::fdm ? fdm_operator_1d(mesh, interval, bc)
                                          : sem_operator_1d(scheme.degree, mesh, interval, bc);
}

int mesh_for_dof(const Scheme& scheme, int dof, const AxisBoundary& bc) {
    if (dof < 1) throw std::invalid_argument("mesh_for_dof: dof must be positive");
    const int dirichlet = bc.dirichlet_ends();
    if (scheme.kind == SchemeKind::fdm) return std::max(2, dof - 1 + dirichlet);
    const int k = scheme.degree;
    int cells = (dof - 1 + dirichlet + k - 1) / k;
    while (cells * k + 1 - dirichlet < 1) ++cells;
    return std::max(1, cells);
}

Eigen::VectorXd load_adjustment(const std::vector<const Operator1D*>& axes, const std::vector<AxisBoundary>& bcs,
                                double scale) {
    if (axes.empty() || axes.size() > 3) throw std::invalid_argument("load_adjustment: dimension must be 1..3");
    if (bcs.size() != axes.size()) throw std::invalid_argument("load_adjustment: one boundary pair per axis required");

    std::array<Eigen::Index, 3> shape{1, 1, 1};
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a] == nullptr) throw std::invalid_argument("load_adjustment: null axis");
        if (!bcs[a].same_kinds(axes[a]->bc))
            throw std::invalid_argument("load_adjustment: boundary kinds differ from the operator's");
        shape[a] = axes[a]->size();
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(shape[0] * shape[1] * shape[2]);
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const double left = bcs[a].left.boundary_value();
        const double right = bcs[a].right.boundary_value();
        if (left == 0.0 && right == 0.0) continue;
        const Eigen::VectorXd line = left * axes[a]->left_load + right * axes[a]->right_load;
        for (Eigen::Index k = 0; k < shape[2]; ++k)
            for (Eigen::Index j = 0; j < shape[1]; ++j)
                for (Eigen::Index i = 0; i < shape[0]; ++i) {
                    const std::array<Eigen::Index, 3> idx{i, j, k};
                    out(i + shape[0] * (j + shape[1] * k)) += line(idx[a]);
                }
    }
    if (scale != 1.0) out *= scale;
    return out;
}

}  // namespace qnsolve
