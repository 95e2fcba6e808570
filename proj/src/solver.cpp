#include "qnsolve/solver.hpp"

#include "qnsolve/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qnsolve {

// ---------------------------------------------------------------------------
// Problem setup

void ProblemSpec::validate() {
    if (domain.empty() || domain.size() > 3) throw std::invalid_argument("problem: dimension must be 1, 2 or 3");
    for (const Interval& iv : domain)
        if (!(iv.hi > iv.lo)) throw std::invalid_argument("problem: empty domain interval");
    if (components < 1) throw std::invalid_argument("problem: at least one component required");
    const auto m = static_cast<std::size_t>(components);
    if (shift.empty()) shift.assign(m, 0.0);
    if (diffusion.empty()) diffusion.assign(m, 1.0);
    if (shift.size() != m || diffusion.size() != m)
        throw std::invalid_argument("problem: shift/diffusion need one entry per component");
    for (double d : diffusion)
        if (!(d > 0.0)) throw std::invalid_argument("problem: diffusion coefficients must be positive");
    if (bc.size() != m) throw std::invalid_argument("problem: boundary data needed for every component");
    for (const auto& per_axis : bc) {
        if (per_axis.size() != domain.size()) throw std::invalid_argument("problem: one boundary pair per axis");
        for (std::size_t a = 0; a < per_axis.size(); ++a) {
            per_axis[a].left.validate();
            per_axis[a].right.validate();
            if (!per_axis[a].same_kinds(bc.front()[a]))
                throw std::invalid_argument("problem: components must share boundary kinds (same unknown grid)");
        }
    }
    if (!reaction || !jacobian) throw std::invalid_argument("problem: reaction and jacobian callbacks required");
}

std::vector<double> DiscreteProblem::point(Eigen::Index flat) const {
    std::vector<double> x(coords.size());
    Eigen::Index rest = flat;
    for (std::size_t a = 0; a < coords.size(); ++a) {
        const Eigen::Index n = coords[a].size();
        x[a] = coords[a](rest % n);
        rest /= n;
    }
    return x;
}

State DiscreteProblem::zeros() const {
    return State(static_cast<std::size_t>(components()), GridField(shape()));
}

DiscreteProblem discretize_problem(ProblemSpec spec, const Scheme& scheme, std::vector<int> mesh, bool with_eigen) {
    spec.validate();
    if (mesh.size() != spec.domain.size()) throw std::invalid_argument("discretize: one mesh size per axis required");

    DiscreteProblem p;
    p.scheme = scheme;
    p.mesh = std::move(mesh);

    std::vector<std::shared_ptr<const Operator1D>> axes;
    for (std::size_t a = 0; a < spec.domain.size(); ++a) {
        Operator1D op = make_operator_1d(scheme, p.mesh[a], spec.domain[a], spec.bc.front()[a]);
        if (with_eigen) op = attach_eigendecomposition(std::move(op));
        p.coords.push_back(op.nodes);
        axes.push_back(std::make_shared<const Operator1D>(std::move(op)));
    }

    const auto shape = [&] {
        std::vector<Eigen::Index> s;
        for (const auto& axis : axes) s.push_back(axis->size());
        return s;
    }();
    p.weights = Eigen::VectorXd::Ones(1);
    {
        // Tensor product of the axis weights, x fastest.
        Eigen::VectorXd w = axes[0]->norm_weights;
        for (std::size_t a = 1; a < axes.size(); ++a) {
            const Eigen::VectorXd& wa = axes[a]->norm_weights;
            Eigen::VectorXd next(w.size() * wa.size());
            for (Eigen::Index j = 0; j < wa.size(); ++j) next.segment(j * w.size(), w.size()) = wa(j) * w;
            w = std::move(next);
        }
        p.weights = std::move(w);
    }

    std::vector<const Operator1D*> raw;
    for (const auto& axis : axes) raw.push_back(axis.get());
    const auto m = static_cast<std::size_t>(spec.components);
    for (std::size_t c = 0; c < m; ++c) {
        TensorOperator op;
        op.axes = axes;
        op.shift = spec.shift[c];
        op.diffusion = spec.diffusion[c];
        p.ops.push_back(op);
        p.fixed.emplace_back(shape, load_adjustment(raw, spec.bc[c], spec.diffusion[c]));
    }
    p.spec = std::move(spec);

    if (p.spec.source) {
        const State src = sample(p, p.spec.source);
        for (std::size_t c = 0; c < m; ++c) p.fixed[c].values() += src[c].values();
    }
    return p;
}

State sample(const DiscreteProblem& problem, const PointFn& fn) {
    State out = problem.zeros();
    const auto m = static_cast<std::size_t>(problem.components());
    std::vector<double> values(m);
    for (Eigen::Index q = 0; q < problem.points(); ++q) {
        const std::vector<double> x = problem.point(q);
        fn(x, values);
        for (std::size_t c = 0; c < m; ++c) out[c].values()(q) = values[c];
    }
    return out;
}

double inner(const DiscreteProblem& problem, const State& a, const State& b) {
    double sum = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c)
        sum += (problem.weights.array() * a[c].values().array() * b[c].values().array()).sum();
    return sum;
}

double l2_norm(const DiscreteProblem& problem, const State& a) { return std::sqrt(inner(problem, a, a)); }

double l2_distance(const DiscreteProblem& problem, const State& a, const State& b) {
    double sum = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c)
        sum += (problem.weights.array() * (a[c].values() - b[c].values()).array().square()).sum();
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Pointwise nonlinearity

namespace {

void check_state(const DiscreteProblem& problem, const State& u) {
    if (u.size() != static_cast<std::size_t>(problem.components()))
        throw std::invalid_argument("state: wrong number of components");
    for (const GridField& f : u)
        if (f.shape() != problem.shape()) throw std::invalid_argument("state: field shape does not match the mesh");
}

[[noreturn]] void throw_nonfinite(const char* what, const DiscreteProblem& problem, Eigen::Index q) {
    std::ostringstream os;
    os << "non-finite " << what << " at node " << q << " (x =";
    for (double x : problem.point(q)) os << ' ' << x;
    os << ')';
    throw EvaluationError(os.str());
}

// Calls `visit(q, u_at_q, jac)` with the pointwise Jacobian at every node.
template <typename Visit>
void for_each_jacobian(const DiscreteProblem& problem, const State& u, Visit&& visit) {
    const auto m = static_cast<std::size_t>(problem.components());
    std::vector<double> uq(m);
    std::vector<double> jac(m * m);
    for (Eigen::Index q = 0; q < problem.points(); ++q) {
        for (std::size_t c = 0; c < m; ++c) uq[c] = u[c].values()(q);
        const std::vector<double> x = problem.point(q);
        problem.spec.jacobian(x, uq, jac);
        for (double v : jac)
            if (!std::isfinite(v)) throw_nonfinite("jacobian", problem, q);
        visit(q, jac);
    }
}

State nonlinear_term(const DiscreteProblem& problem, const State& u) {
    const auto m = static_cast<std::size_t>(problem.components());
    State out = problem.zeros();
    std::vector<double> uq(m);
    std::vector<double> fq(m);
    for (Eigen::Index q = 0; q < problem.points(); ++q) {
        for (std::size_t c = 0; c < m; ++c) uq[c] = u[c].values()(q);
        const std::vector<double> x = problem.point(q);
        problem.spec.reaction(x, uq, fq);
        for (std::size_t c = 0; c < m; ++c) {
            if (!std::isfinite(fq[c])) throw_nonfinite("reaction", problem, q);
            out[c].values()(q) = fq[c];
        }
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

State residual(const DiscreteProblem& problem, const State& u) {
    check_state(problem, u);
    State out = nonlinear_term(problem, u);
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c].values() += apply_operator(problem.ops[c], u[c]).values();
        out[c].values() += problem.fixed[c].values();
    }
    return out;
}

SpectrumBounds block_eigenvalues_2x2(double a, double b, double c, double d) {
    const double mean = 0.5 * (a + d);
    const double disc = (a - d) * (a - d) + 4.0 * b * c;
    if (disc < 0.0) return {mean, mean, true};
    const double half_root = 0.5 * std::sqrt(disc);
    return {mean - half_root, mean + half_root, false};
}

SpectrumBounds nonlinear_jacobian_eig_bounds(const DiscreteProblem& problem, const State& u) {
    check_state(problem, u);
    const int m = problem.components();
    SpectrumBounds bounds{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), false};
    auto absorb = [&](double lo, double hi) {
        bounds.min = std::min(bounds.min, lo);
        bounds.max = std::max(bounds.max, hi);
    };
    if (m == 1) {
        for_each_jacobian(problem, u, [&](Eigen::Index, const std::vector<double>& jac) { absorb(jac[0], jac[0]); });
    } else if (m == 2) {
        for_each_jacobian(problem, u, [&](Eigen::Index, const std::vector<double>& jac) {
            const SpectrumBounds local = block_eigenvalues_2x2(jac[0], jac[1], jac[2], jac[3]);
            bounds.complex = bounds.complex || local.complex;
            absorb(local.min, local.max);
        });
    } else {
        Eigen::MatrixXd block(m, m);
        for_each_jacobian(problem, u, [&](Eigen::Index, const std::vector<double>& jac) {
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) block(r, c) = jac[static_cast<std::size_t>(r * m + c)];
            const Eigen::VectorXcd ev = block.eigenvalues();
            for (Eigen::Index k = 0; k < ev.size(); ++k) {
                if (ev(k).imag() != 0.0) bounds.complex = true;
                absorb(ev(k).real(), ev(k).real());
            }
        });
    }
    return bounds;
}

// ---------------------------------------------------------------------------
// Beta strategies

BetaStrategy BetaStrategy::parse(const std::string& text) {
    if (text == "midpoint") return midpoint();
    if (text == "sum") return sum();
    if (text == "max") return max_eig();
    if (text == "min") return min_eig();
    if (text.rfind("fixed:", 0) == 0) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text.substr(6), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 6 || !std::isfinite(v))
            throw std::invalid_argument("beta: bad fixed value in '" + text + "'");
        return fixed(v);
    }
    throw std::invalid_argument("beta: expected midpoint|sum|max|min|fixed:<v>, got '" + text + "'");
}

std::string BetaStrategy::label() const {
    switch (kind) {
        case Kind::midpoint: return "midpoint";
        case Kind::sum: return "sum";
        case Kind::max_eig: return "max";
        case Kind::min_eig: return "min";
        case Kind::fixed: {
            std::ostringstream os;
            os << "fixed:" << value;
            return os.str();
        }
    }
    return "midpoint";
}

double BetaStrategy::choose(const SpectrumBounds& bounds) const {
    switch (kind) {
        case Kind::midpoint: return 0.5 * (bounds.min + bounds.max);
        case Kind::sum: return bounds.min + bounds.max;
        case Kind::max_eig: return bounds.max;
        case Kind::min_eig: return bounds.min;
        case Kind::fixed: return value;
    }
    return 0.5 * (bounds.min + bounds.max);
}

// ---------------------------------------------------------------------------
// Iterations

namespace {

void check_options(const SolveOptions& options) {
    if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
    if (options.max_iter < 0) throw std::invalid_argument("solve: max_iter must be non-negative");
    if (!(options.damping > 0.0 && options.damping <= 1.0))
        throw std::invalid_argument("solve: damping must lie in (0, 1]");
}

// Moves beta off an eigenvalue of -(A_h) when it would make the shifted operator singular.
double nudge_beta(const DiscreteProblem& problem, double beta) {
    for (const TensorOperator& op : problem.ops) {
        if (smallest_denominator(op, beta).magnitude <= kSingularShiftGuard) {
            beta += 10.0 * kSingularShiftGuard;
            break;
        }
    }
    return beta;
}

// Records the residual norm and reports whether the loop should stop.
bool record_residual(SolveReport& report, double norm, int iteration, const SolveOptions& options) {
    report.residual_history.push_back(norm);
    if (!std::isfinite(norm)) throw EvaluationError("residual norm became non-finite at iteration " +
                                                    std::to_string(iteration));
    if (norm > options.divergence_limit) throw DivergenceError(iteration, norm);
    if (norm <= options.tol) {
        report.converged = true;
        report.iterations = iteration;
        return true;
    }
    if (iteration >= options.max_iter) {
        report.iterations = iteration;
        return true;
    }
    return false;
}

}  // namespace

SolveReport quasi_newton_solve(const DiscreteProblem& problem, State u, const SolveOptions& options) {
    check_options(options);
    check_state(problem, u);
    for (const TensorOperator& op : problem.ops)
        if (!op.has_eigen()) throw InvalidStateError("quasi_newton_solve: eigendecomposition not attached");

    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    for (int n = 0;; ++n) {
        const State f = residual(problem, u);
        if (record_residual(report, l2_norm(problem, f), n, options)) break;

        const SpectrumBounds bounds = nonlinear_jacobian_eig_bounds(problem, u);
        report.complex_spectrum = report.complex_spectrum || bounds.complex;
        const double beta = nudge_beta(problem, options.beta.choose(bounds));
        report.beta_history.push_back(beta);
        try {
            for (std::size_t c = 0; c < u.size(); ++c)
                u[c].values() -= options.damping * fast_shift_solve(problem.ops[c], beta, f[c]).values();
        } catch (const SingularShiftError& e) {
            throw e.at_iteration(n);
        }
    }
    report.solution = std::move(u);
    report.wall_seconds = seconds_since(start);
    return report;
}

SolveReport newton_solve(const DiscreteProblem& problem, State u, const SolveOptions& options) {
    check_options(options);
    check_state(problem, u);
    const Eigen::Index n_points = problem.points();
    const Eigen::Index m = problem.components();
    const Eigen::Index total = n_points * m;
    if (total > kNewtonDenseLimit)
        throw ConfigError("newton: " + std::to_string(total) + " unknowns exceed the dense limit of " +
                          std::to_string(kNewtonDenseLimit) + "; use the quasi-Newton method instead");

    const auto start = std::chrono::steady_clock::now();
    std::vector<Eigen::MatrixXd> linear;
    for (const TensorOperator& op : problem.ops) linear.push_back(op.assemble_dense());

    SolveReport report;
    Eigen::MatrixXd jacobian(total, total);
    Eigen::VectorXd rhs(total);
    for (int n = 0;; ++n) {
        const State f = residual(problem, u);
        if (record_residual(report, l2_norm(problem, f), n, options)) break;

        jacobian.setZero();
        for (Eigen::Index c = 0; c < m; ++c) {
            jacobian.block(c * n_points, c * n_points, n_points, n_points) = linear[static_cast<std::size_t>(c)];
            rhs.segment(c * n_points, n_points) = f[static_cast<std::size_t>(c)].values();
        }
        for_each_jacobian(problem, u, [&](Eigen::Index q, const std::vector<double>& jac) {
            for (Eigen::Index r = 0; r < m; ++r)
                for (Eigen::Index c = 0; c < m; ++c)
                    jacobian(r * n_points + q, c * n_points + q) += jac[static_cast<std::size_t>(r * m + c)];
        });

        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian);
        if (!(lu.rcond() > 1e-15)) throw NumericalError("newton: singular Jacobian at iteration " + std::to_string(n));
        const Eigen::VectorXd step = lu.solve(rhs);
        for (Eigen::Index c = 0; c < m; ++c)
            u[static_cast<std::size_t>(c)].values() -= options.damping * step.segment(c * n_points, n_points);
    }
    report.solution = std::move(u);
    report.wall_seconds = seconds_since(start);
    return report;
}

SolveReport eigen_mode_solve(const DiscreteProblem& problem, State u, const SolveOptions& options) {
    check_options(options);
    check_state(problem, u);
    if (problem.components() != 1) throw std::invalid_argument("eigen_mode_solve: scalar problems only");
    const TensorOperator& op = problem.ops.front();
    if (!op.has_eigen()) throw InvalidStateError("eigen_mode_solve: eigendecomposition not attached");

    const auto start = std::chrono::steady_clock::now();
    auto normalize = [&](State& v, int iteration) {
        const double norm = l2_norm(problem, v);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw NumericalError("eigen_mode_solve: iterate has zero norm at iteration " + std::to_string(iteration));
        v.front().values() /= norm;
    };
    normalize(u, 0);

    SolveReport report;
    for (int n = 0;; ++n) {
        State au{apply_operator(op, u.front())};
        au.front().values() += problem.fixed.front().values();
        const State fu = nonlinear_term(problem, u);
        State r{au.front()};
        r.front().values() += fu.front().values();
        const double lambda = inner(problem, r, u) / inner(problem, u, u);
        report.lambda_history.push_back(lambda);
        r.front().values() -= lambda * u.front().values();
        if (record_residual(report, l2_norm(problem, r), n, options)) break;

        const SpectrumBounds bounds = nonlinear_jacobian_eig_bounds(problem, u);
        const double beta = nudge_beta(problem, options.beta.choose(bounds));
        report.beta_history.push_back(beta);
        try {
            u.front().values() -= options.damping * fast_shift_solve(op, beta, r.front()).values();
        } catch (const SingularShiftError& e) {
            throw e.at_iteration(n);
        }
        normalize(u, n + 1);
        report.norm_history.push_back(l2_norm(problem, u));
    }
    report.solution = std::move(u);
    report.wall_seconds = seconds_since(start);
    return report;
}

// ---------------------------------------------------------------------------
// Contraction bound

double contraction_ratio(std::span<const double> nonlinear_spectrum, std::span<const double> operator_spectrum,
                         double beta) {
    if (nonlinear_spectrum.empty() || operator_spectrum.empty())
        throw std::invalid_argument("contraction_ratio: empty spectrum");
    double top = 0.0;
    for (double mu : nonlinear_spectrum) top = std::max(top, std::abs(beta - mu));
    double bottom = std::numeric_limits<double>::infinity();
    for (double lam : operator_spectrum) bottom = std::min(bottom, std::abs(lam + beta));
    return top / bottom;
}

double contraction_ratio_piecewise(double mu_min, double mu_max, double lambda_min, double beta) {
    const double mid = 0.5 * (mu_min + mu_max);
    if (beta < mid) return (mu_max - beta) / (beta + lambda_min);
    return (beta - mu_min) / (beta + lambda_min);
}

ContractionBound contraction_bound(const DiscreteProblem& problem, const State& u, double beta) {
    std::vector<double> mu;
    const auto m = static_cast<std::size_t>(problem.components());
    for_each_jacobian(problem, u, [&](Eigen::Index, const std::vector<double>& jac) {
        if (m == 1) {
            mu.push_back(jac[0]);
        } else if (m == 2) {
            const SpectrumBounds local = block_eigenvalues_2x2(jac[0], jac[1], jac[2], jac[3]);
            mu.push_back(local.min);
            mu.push_back(local.max);
        } else {
            Eigen::MatrixXd block(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < m; ++c)
                    block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = jac[r * m + c];
            const Eigen::VectorXcd ev = block.eigenvalues();
            for (Eigen::Index k = 0; k < ev.size(); ++k) mu.push_back(ev(k).real());
        }
    });
    std::vector<double> lam;
    for (const TensorOperator& op : problem.ops) {
        const Eigen::VectorXd s = op.spectrum();
        lam.insert(lam.end(), s.data(), s.data() + s.size());
    }
    return {beta, contraction_ratio(mu, lam, beta)};
}

}  // namespace qnsolve
