#pragma once

#include "qnsolve/problems.hpp"
#include "qnsolve/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qnsolve {

enum class Method { quasi_newton, newton };

[[nodiscard]] std::string method_label(Method m);
/// Accepts "qn", "quasi-newton" or "newton".
[[nodiscard]] Method parse_method(const std::string& text);

/// Parses "n[,n...]" into positive integers.
[[nodiscard]] std::vector<int> parse_int_list(const std::string& text);

struct ExperimentConfig {
    std::string problem;
    std::optional<Scheme> scheme;   ///< preset default when empty
    std::vector<int> dof;           ///< unknowns per axis; preset default when empty
    std::string init;               ///< gray_scott bump pattern for the reference solve
    Method method = Method::quasi_newton;
    BetaStrategy beta = BetaStrategy::midpoint();
    double pert = 0.1;
    int trials = 100;
    std::uint64_t seed = 0;
    std::optional<double> tol;      ///< preset tolerance when empty
    int max_iter = 10000;
    std::optional<double> damping;  ///< preset damping when empty
    int threads = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// Discretized problem plus the unperturbed numerical solution that trials start from.
struct PreparedProblem {
    ProblemPreset preset;
    DiscreteProblem problem;
    State reference;
    int reference_iterations = 0;
    std::optional<State> exact;  ///< sampled exact solution when known
};

/// Builds the discretization and solves once from the exact solution (or the preset guess /
/// bump pattern). Throws ConfigError for bad input and NumericalError if the reference fails.
[[nodiscard]] PreparedProblem prepare_problem(const ExperimentConfig& config);

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double seconds = 0.0;
    double error_to_exact = 0.0;  ///< NaN when no exact solution
    std::string failure;          ///< exception text for trials that threw
};

struct StatsRow {
    std::string problem;
    std::string method;
    std::string beta;
    std::string disc;
    std::string dof;  ///< "NxM..." unknown counts
    double pert = 0.0;
    int trials = 0;
    double mean_iterations = 0.0;
    double std_iterations = 0.0;
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
    double convergence_rate = 0.0;
    double mean_error_to_exact = 0.0;  ///< NaN when no exact solution
};

struct ExperimentResult {
    StatsRow stats;
    std::vector<TrialResult> trials;  ///< ordered by trial index
};

/// Trial t starts from reference + perturbation(seed + t) and runs the configured solver.
/// Means and sample standard deviations use converged trials only.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedProblem& prepared);

/// Mean and sample standard deviation (0 for fewer than two values).
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
[[nodiscard]] MeanStd mean_std(const std::vector<double>& values);

void write_trials_csv(std::ostream& os, const ExperimentResult& result);
void write_stats_csv(std::ostream& os, const std::vector<StatsRow>& rows);
void write_experiment_json(std::ostream& os, const ExperimentResult& result);

/// Row-major dump under a "# shape: ..." header; systems prepend the component count.
void write_field(std::ostream& os, const State& state);

// ---------------------------------------------------------------------------
// Tables

struct TableOptions {
    bool full = false;
    std::optional<int> trials;  ///< table default when empty
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TableCell {
    std::string row;
    std::string column;
    std::string published;  ///< published "mean ± std", empty when not reported
    StatsRow stats;
};

struct TableResult {
    int id = 0;
    std::string title;
    std::vector<std::string> notes;  ///< reduced resolutions, skipped columns
    std::vector<TableCell> cells;
};

/// Table ids 1..9. Throws ConfigError for other ids.
[[nodiscard]] TableResult reproduce_table(int id, const TableOptions& options);
void write_table_csv(std::ostream& os, const TableResult& table);
void write_table_json(std::ostream& os, const TableResult& table);

// ---------------------------------------------------------------------------
// Refinement study

struct OrderRow {
    int mesh = 0;
    Eigen::Index unknowns = 0;
    double error = 0.0;
    double order = 0.0;  ///< NaN on the first row
    int iterations = 0;
};

/// Solves from the exact solution on each mesh (cells for sem, intervals for fdm) and reports
/// discrete L2 errors with observed orders log2(e_h / e_{h/2}) scaled by the actual mesh ratio.
[[nodiscard]] std::vector<OrderRow> convergence_study(const std::string& problem, const Scheme& scheme,
                                                      const std::vector<int>& meshes, double tol = 1e-10);
void write_order_csv(std::ostream& os, const std::vector<OrderRow>& rows);

}  // namespace qnsolve
