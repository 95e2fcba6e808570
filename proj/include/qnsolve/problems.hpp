#pragma once

#include "qnsolve/solver.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qnsolve {

/// A benchmark problem with the discretization it is usually run on.
struct ProblemPreset {
    std::string name;
    std::string summary;
    ProblemSpec spec;
    Scheme scheme;           ///< default discretization
    std::vector<int> dof;    ///< default unknowns per axis
    double damping = 1.0;
    /// Stopping tolerance for experiments. Raised above 1e-10 where the rounding floor of the
    /// discrete residual (about eps * ||A_h|| * ||U||) sits near 1e-10 at the default resolution.
    double tol = 1e-10;
    bool eigen_mode = false; ///< solved with eigen_mode_solve (normalized iterate)
    PointFn initial_guess;   ///< start of the reference solve when there is no exact solution
};

/// Registered names, in registry order.
[[nodiscard]] std::vector<std::string> preset_names();

/// Throws ConfigError listing the registry for an unknown name.
[[nodiscard]] ProblemPreset preset(const std::string& name);

/// Mesh parameter per axis giving `dof` unknowns along each axis (one value broadcasts).
[[nodiscard]] std::vector<int> mesh_for_preset(const ProblemPreset& p, const Scheme& scheme, std::vector<int> dof);

/// Seeded stream of uniform draws in the open interval (-1, 1).
///
/// Uses the 53 high bits of std::mt19937_64, whose output sequence is fixed by the C++ standard,
/// so coefficient streams agree across compilers.
class CoefficientStream {
public:
    explicit CoefficientStream(std::uint64_t seed) : engine_(seed) {}
    double next() {
        const double unit = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return 2.0 * unit - 1.0;
    }

private:
    std::mt19937_64 engine_;
};

/// Degree-4 tensor polynomial with coefficients drawn in lexicographic (i, j, k) order,
/// evaluated on the grid `coords` (x fastest), divided by its largest nodal magnitude and
/// multiplied by `scale`. An all-zero draw is resampled once before throwing NumericalError.
[[nodiscard]] GridField perturbation(int dim, std::uint64_t seed, double scale,
                                     const std::vector<Eigen::VectorXd>& coords);

/// Same as above, continuing an existing stream.
[[nodiscard]] GridField perturbation(CoefficientStream& stream, double scale,
                                     const std::vector<Eigen::VectorXd>& coords);

/// One independent polynomial per component, drawn from a single stream seeded with `seed`.
[[nodiscard]] State perturbation_state(const DiscreteProblem& problem, std::uint64_t seed, double scale);

/// Named Gray-Scott start: flat-topped bumps of A at fixed positions, S = 1 - 2A (floored at 0).
/// The default size matches a single steady spot of the preset's parameters.
struct BumpPattern {
    std::string name;
    std::vector<std::array<double, 2>> centers;
    double width = 0.22;
    double height = 0.35;
};

[[nodiscard]] std::vector<BumpPattern> gray_scott_patterns();
[[nodiscard]] State gray_scott_initial_state(const DiscreteProblem& problem, const BumpPattern& pattern);

}  // namespace qnsolve
