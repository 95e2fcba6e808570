#include "qnsolve/jacobi.hpp"

#include "qnsolve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qnsolve {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
}

struct Rotation {
    Eigen::Index p;
    Eigen::Index q;
    double c;
    double s;
    double t;
    double app;
    double aqq;
    double apq;
};

void rotate_columns(double* __restrict xp, double* __restrict xq, Eigen::Index n, double c, double s) {
    for (Eigen::Index k = 0; k < n; ++k) {
        const double a = xp[k];
        const double b = xq[k];
        xp[k] = c * a - s * b;
        xq[k] = s * a + c * b;
    }
}

}  // namespace

SymmetricEigenResult jacobi_eigen(const Eigen::MatrixXd& input, double rel_tol, int max_sweeps) {
    if (input.rows() != input.cols()) throw std::invalid_argument("jacobi_eigen: matrix must be square");
    const Eigen::Index n = input.rows();

    // Work on the symmetric part so tiny asymmetries from assembly do not bias the result.
    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = a.norm();

    SymmetricEigenResult result;
    if (n > 1 && scale > 0.0) {
        const double target = rel_tol * scale;

        // Round-robin (tournament) ordering: every step pairs all indices into disjoint
        // rotations, so row updates can be applied column by column from contiguous memory.
        // An odd size gets a dummy slot n that is never rotated.
        const Eigen::Index m = n + (n % 2);
        std::vector<Eigen::Index> slot(static_cast<std::size_t>(m));
        std::iota(slot.begin(), slot.end(), Eigen::Index{0});
        std::vector<Rotation> rots;
        rots.reserve(static_cast<std::size_t>(m / 2));

        int sweep = 0;
        for (; sweep < max_sweeps; ++sweep) {
            if (off_diagonal_norm(a) < target) break;
            bool rotated = false;
            for (Eigen::Index step = 0; step < m - 1; ++step) {
                rots.clear();
                for (Eigen::Index i = 0; i < m / 2; ++i) {
                    Eigen::Index p = slot[static_cast<std::size_t>(i)];
                    Eigen::Index q = slot[static_cast<std::size_t>(m - 1 - i)];
                    if (p == n || q == n) continue;
                    if (p > q) std::swap(p, q);
                    const double apq = a(p, q);
                    if (apq == 0.0) continue;
                    const double app = a(p, p);
                    const double aqq = a(q, q);
                    // Negligible against both diagonal entries: annihilate without rotating.
                    if (std::abs(apq) < 1e-18 * std::sqrt(std::abs(app * aqq)) || std::abs(apq) < 1e-300) {
                        a(p, q) = 0.0;
                        a(q, p) = 0.0;
                        continue;
                    }
                    const double theta = (aqq - app) / (2.0 * apq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    rots.push_back({p, q, c, t * c, t, app, aqq, apq});
                }

                if (!rots.empty()) {
                    rotated = true;
                    // A <- A J: pairs of contiguous columns.
                    for (const Rotation& r : rots) rotate_columns(a.col(r.p).data(), a.col(r.q).data(), n, r.c, r.s);
                    // A <- J^T A: the same rotations inside every column.
                    for (Eigen::Index k = 0; k < n; ++k) {
                        double* col = a.col(k).data();
                        for (const Rotation& r : rots) {
                            const double x = col[r.p];
                            const double y = col[r.q];
                            col[r.p] = r.c * x - r.s * y;
                            col[r.q] = r.s * x + r.c * y;
                        }
                    }
                    for (const Rotation& r : rots) {
                        a(r.p, r.p) = r.app - r.t * r.apq;
                        a(r.q, r.q) = r.aqq + r.t * r.apq;
                        a(r.p, r.q) = 0.0;
                        a(r.q, r.p) = 0.0;
                        rotate_columns(v.col(r.p).data(), v.col(r.q).data(), n, r.c, r.s);
                    }
                }
                std::rotate(slot.begin() + 1, slot.end() - 1, slot.end());
            }
            if (!rotated) break;
        }
        if (sweep == max_sweeps && off_diagonal_norm(a) >= target)
            throw NumericalError("jacobi_eigen: no convergence within the sweep limit");
        result.sweeps = sweep;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

    result.values.resize(n);
    result.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        result.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        result.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return result;
}

namespace {

bool is_centrosymmetric(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    const double tol = 1e-14 * a.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(a(i, j) - a(n - 1 - i, n - 1 - j)) > tol) return false;
    return true;
}

}  // namespace

SymmetricEigenResult jacobi_eigen_split(const Eigen::MatrixXd& input, double rel_tol, int max_sweeps) {
    if (input.rows() != input.cols()) throw std::invalid_argument("jacobi_eigen: matrix must be square");
    const Eigen::Index n = input.rows();
    if (n < 4 || !is_centrosymmetric(input)) return jacobi_eigen(input, rel_tol, max_sweeps);

    const Eigen::Index half = n / 2;
    const bool center = n % 2 == 1;
    const Eigen::Index ne = half + (center ? 1 : 0);
    const double r2 = std::sqrt(0.5);
    const Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    auto mirror = [n](Eigen::Index i) { return n - 1 - i; };

    // Blocks of Q^T A Q with Q = [even | odd], even_i = (e_i + e_mirror(i))/sqrt2 (plus the center).
    Eigen::MatrixXd even(ne, ne);
    Eigen::MatrixXd odd(half, half);
    for (Eigen::Index j = 0; j < half; ++j) {
        for (Eigen::Index i = 0; i < half; ++i) {
            const double direct = a(i, j) + a(mirror(i), mirror(j));
            const double cross = a(i, mirror(j)) + a(mirror(i), j);
            even(i, j) = 0.5 * (direct + cross);
            odd(i, j) = 0.5 * (direct - cross);
        }
    }
    if (center) {
        for (Eigen::Index i = 0; i < half; ++i) {
            even(i, half) = r2 * (a(i, half) + a(mirror(i), half));
            even(half, i) = even(i, half);
        }
        even(half, half) = a(half, half);
    }

    const SymmetricEigenResult ev = jacobi_eigen(even, rel_tol, max_sweeps);
    const SymmetricEigenResult od = jacobi_eigen(odd, rel_tol, max_sweeps);

    SymmetricEigenResult result;
    result.sweeps = std::max(ev.sweeps, od.sweeps);
    result.values.resize(n);
    result.vectors.setZero(n, n);
    // Merge the two ascending lists.
    Eigen::Index ie = 0;
    Eigen::Index io = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const bool take_even = io == half || (ie < ne && ev.values(ie) <= od.values(io));
        if (take_even) {
            result.values(k) = ev.values(ie);
            for (Eigen::Index i = 0; i < half; ++i) {
                result.vectors(i, k) = r2 * ev.vectors(i, ie);
                result.vectors(mirror(i), k) = r2 * ev.vectors(i, ie);
            }
            if (center) result.vectors(half, k) = ev.vectors(half, ie);
            ++ie;
        } else {
            result.values(k) = od.values(io);
            for (Eigen::Index i = 0; i < half; ++i) {
                result.vectors(i, k) = r2 * od.vectors(i, io);
                result.vectors(mirror(i), k) = -r2 * od.vectors(i, io);
            }
            ++io;
        }
    }
    return result;
}

}  // namespace qnsolve
