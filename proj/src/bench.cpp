#include "qnsolve/bench.hpp"

#include "qnsolve/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace qnsolve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string dof_label(const std::vector<Eigen::Index>& shape) {
    std::string out;
    for (std::size_t a = 0; a < shape.size(); ++a) out += (a ? "x" : "") + std::to_string(shape[a]);
    return out;
}

// Empty JSON value for NaN so the output stays valid JSON.
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

std::string method_label(Method m) { return m == Method::newton ? "newton" : "qn"; }

Method parse_method(const std::string& text) {
    if (text == "qn" || text == "quasi-newton") return Method::quasi_newton;
    if (text == "newton") return Method::newton;
    throw ConfigError("method: expected qn|newton, got '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || v < 1) throw ConfigError("expected positive integers, got '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("expected comma-separated integers, got '" + text + "'");
    return out;
}

void ExperimentConfig::validate() const {
    if (problem.empty()) throw ConfigError("experiment: problem name required");
    if (trials < 1) throw ConfigError("experiment: trials must be at least 1");
    if (tol && !(*tol > 0.0)) throw ConfigError("experiment: tol must be positive");
    if (max_iter < 0) throw ConfigError("experiment: max_iter must be non-negative");
    if (damping && !(*damping > 0.0 && *damping <= 1.0)) throw ConfigError("experiment: damping must lie in (0, 1]");
    if (!(pert >= 0.0)) throw ConfigError("experiment: perturbation scale must be non-negative");
    if (threads < 1) throw ConfigError("experiment: threads must be at least 1");
    if (dof.size() > 3) throw ConfigError("experiment: at most three resolutions");
    for (int d : dof)
        if (d < 2) throw ConfigError("experiment: resolution must be at least 2 per axis");
    if (scheme && scheme->kind == SchemeKind::sem && scheme->degree < 1)
        throw ConfigError("experiment: sem degree must be at least 1");
}

PreparedProblem prepare_problem(const ExperimentConfig& config) {
    config.validate();
    PreparedProblem out;
    out.preset = preset(config.problem);
    const ProblemPreset& p = out.preset;
    if (config.method == Method::newton && p.eigen_mode)
        throw ConfigError("problem '" + p.name + "' is an eigenvalue problem; newton is not available");
    if (!config.init.empty() && p.spec.components != 2)
        throw ConfigError("--init selects a gray_scott bump pattern");

    const Scheme scheme = config.scheme.value_or(p.scheme);
    const std::vector<int> mesh = mesh_for_preset(p, scheme, config.dof.empty() ? p.dof : config.dof);
    out.problem = discretize_problem(p.spec, scheme, mesh);

    State start;
    if (!config.init.empty()) {
        const auto patterns = gray_scott_patterns();
        const auto it = std::find_if(patterns.begin(), patterns.end(),
                                     [&](const BumpPattern& b) { return b.name == config.init; });
        if (it == patterns.end()) {
            std::string known;
            for (const auto& b : patterns) known += (known.empty() ? "" : ", ") + b.name;
            throw ConfigError("unknown pattern '" + config.init + "' (known: " + known + ")");
        }
        start = gray_scott_initial_state(out.problem, *it);
    } else if (p.spec.exact) {
        start = sample(out.problem, p.spec.exact);
    } else {
        start = sample(out.problem, p.initial_guess);
    }
    if (p.spec.exact) out.exact = sample(out.problem, p.spec.exact);

    SolveOptions opts;
    opts.tol = config.tol.value_or(p.tol);
    opts.max_iter = config.max_iter;
    opts.damping = config.damping.value_or(p.damping);
    const SolveReport ref = p.eigen_mode ? eigen_mode_solve(out.problem, std::move(start), opts)
                                         : quasi_newton_solve(out.problem, std::move(start), opts);
    if (!ref.converged)
        throw NumericalError("reference solve for '" + p.name + "' stopped at residual " +
                             format("%.3e", ref.final_residual()) + " after " + std::to_string(ref.iterations) +
                             " iterations");
    out.reference = ref.solution;
    out.reference_iterations = ref.iterations;
    return out;
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return {kNaN, kNaN};
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const PreparedProblem prepared = prepare_problem(config);
    return run_experiment(config, prepared);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedProblem& prepared) {
    config.validate();
    const ProblemPreset& p = prepared.preset;
    const DiscreteProblem& problem = prepared.problem;
    if (config.method == Method::newton) {
        if (p.eigen_mode) throw ConfigError("problem '" + p.name + "' is an eigenvalue problem; newton is not available");
        if (problem.points() * problem.components() > kNewtonDenseLimit)
            throw ConfigError("newton: " + std::to_string(problem.points() * problem.components()) +
                              " unknowns exceed the dense limit of " + std::to_string(kNewtonDenseLimit) +
                              "; use --method qn");
    }

    SolveOptions opts;
    opts.beta = config.beta;
    opts.tol = config.tol.value_or(p.tol);
    opts.max_iter = config.max_iter;
    opts.damping = config.damping.value_or(p.damping);

    std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
    auto run_trial = [&](int t) {
        TrialResult r;
        r.trial = t;
        r.seed = config.seed + static_cast<std::uint64_t>(t);
        r.error_to_exact = kNaN;
        try {
            State u = prepared.reference;
            const State delta = perturbation_state(problem, r.seed, config.pert);
            for (std::size_t c = 0; c < u.size(); ++c) u[c].values() += delta[c].values();
            const SolveReport report = config.method == Method::newton ? newton_solve(problem, std::move(u), opts)
                                       : p.eigen_mode ? eigen_mode_solve(problem, std::move(u), opts)
                                                      : quasi_newton_solve(problem, std::move(u), opts);
            r.converged = report.converged;
            r.iterations = report.iterations;
            r.residual = report.final_residual();
            r.seconds = report.wall_seconds;
            if (prepared.exact) r.error_to_exact = l2_distance(problem, *prepared.exact, report.solution);
        } catch (const DivergenceError& e) {
            r.iterations = e.iteration();
            r.residual = e.residual();
            r.failure = e.what();
        } catch (const SingularShiftError& e) {
            r.iterations = e.iteration();
            r.residual = kNaN;
            r.failure = e.what();
        } catch (const std::runtime_error& e) {
            r.residual = kNaN;
            r.failure = e.what();
        }
        results[static_cast<std::size_t>(t)] = std::move(r);
    };

    const int workers = std::min(config.threads, config.trials);
    if (workers <= 1) {
        for (int t = 0; t < config.trials; ++t) run_trial(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int t = next++; t < config.trials; t = next++) run_trial(t);
            });
        for (std::thread& th : pool) th.join();
    }

    ExperimentResult out;
    StatsRow& s = out.stats;
    s.problem = p.name;
    s.method = method_label(config.method);
    s.beta = config.method == Method::newton ? "-" : config.beta.label();
    s.disc = problem.scheme.label();
    s.dof = dof_label(problem.shape());
    s.pert = config.pert;
    s.trials = config.trials;

    std::vector<double> iters;
    std::vector<double> secs;
    std::vector<double> errs;
    for (const TrialResult& r : results) {
        if (!r.converged) continue;
        iters.push_back(r.iterations);
        secs.push_back(r.seconds);
        if (std::isfinite(r.error_to_exact)) errs.push_back(r.error_to_exact);
    }
    const MeanStd it = mean_std(iters);
    const MeanStd sec = mean_std(secs);
    s.mean_iterations = it.mean;
    s.std_iterations = it.std;
    s.mean_seconds = sec.mean;
    s.std_seconds = sec.std;
    s.convergence_rate = static_cast<double>(iters.size()) / static_cast<double>(results.size());
    s.mean_error_to_exact = errs.empty() ? kNaN : mean_std(errs).mean;
    out.trials = std::move(results);
    return out;
}

// ---------------------------------------------------------------------------
// Writers

void write_trials_csv(std::ostream& os, const ExperimentResult& result) {
    const StatsRow& s = result.stats;
    os << "problem,method,beta,disc,dof,pert,trial,seed,converged,iterations,residual,seconds\n";
    for (const TrialResult& r : result.trials) {
        os << s.problem << ',' << s.method << ',' << s.beta << ',' << s.disc << ',' << s.dof << ','
           << format("%g", s.pert) << ',' << r.trial << ',' << r.seed << ',' << (r.converged ? 1 : 0) << ','
           << r.iterations << ',' << format("%.10e", r.residual) << ',' << format("%.6f", r.seconds) << '\n';
    }
}

void write_stats_csv(std::ostream& os, const std::vector<StatsRow>& rows) {
    os << "problem,method,beta,disc,dof,pert,mean_iter,std_iter,mean_sec,std_sec,conv_rate,mean_err\n";
    for (const StatsRow& s : rows) {
        os << s.problem << ',' << s.method << ',' << s.beta << ',' << s.disc << ',' << s.dof << ','
           << format("%g", s.pert) << ',' << format("%.4f", s.mean_iterations) << ','
           << format("%.4f", s.std_iterations) << ',' << format("%.6f", s.mean_seconds) << ','
           << format("%.6f", s.std_seconds) << ',' << format("%.4f", s.convergence_rate) << ','
           << format("%.6e", s.mean_error_to_exact) << '\n';
    }
}

namespace {

nlohmann::json stats_json(const StatsRow& s) {
    return {{"problem", s.problem},
            {"method", s.method},
            {"beta", s.beta},
            {"disc", s.disc},
            {"dof", s.dof},
            {"pert", s.pert},
            {"trials", s.trials},
            {"mean_iter", number_or_null(s.mean_iterations)},
            {"std_iter", number_or_null(s.std_iterations)},
            {"mean_sec", number_or_null(s.mean_seconds)},
            {"std_sec", number_or_null(s.std_seconds)},
            {"conv_rate", s.convergence_rate},
            {"mean_err", number_or_null(s.mean_error_to_exact)}};
}

}  // namespace

void write_experiment_json(std::ostream& os, const ExperimentResult& result) {
    nlohmann::json trials = nlohmann::json::array();
    for (const TrialResult& r : result.trials) {
        nlohmann::json t = {{"trial", r.trial},
                            {"seed", r.seed},
                            {"converged", r.converged},
                            {"iterations", r.iterations},
                            {"residual", number_or_null(r.residual)},
                            {"seconds", r.seconds},
                            {"error", number_or_null(r.error_to_exact)}};
        if (!r.failure.empty()) t["failure"] = r.failure;
        trials.push_back(std::move(t));
    }
    const nlohmann::json doc = {{"stats", stats_json(result.stats)}, {"trials", std::move(trials)}};
    os << doc.dump(2) << '\n';
}

void write_field(std::ostream& os, const State& state) {
    if (state.empty()) throw std::invalid_argument("write_field: empty state");
    const std::vector<Eigen::Index>& shape = state.front().shape();
    os << "# shape: ";
    if (state.size() > 1) os << state.size() << ',';
    for (std::size_t a = 0; a < shape.size(); ++a) os << (a ? "," : "") << shape[a];
    os << '\n';
    const Eigen::Index nx = shape[0];
    const Eigen::Index ny = shape.size() > 1 ? shape[1] : 1;
    const Eigen::Index nz = shape.size() > 2 ? shape[2] : 1;
    char buf[32];
    for (const GridField& f : state) {
        // Row-major: the last axis varies fastest.
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index j = 0; j < ny; ++j)
                for (Eigen::Index k = 0; k < nz; ++k) {
                    std::snprintf(buf, sizeof buf, "%.17g", f(i, j, k));
                    os << buf << '\n';
                }
    }
}

// ---------------------------------------------------------------------------
// Tables

namespace {

struct ColumnDef {
    std::string label;
    double pert;
    int dof;
    bool full_only = false;
};

struct RowDef {
    std::string label;
    Method method;
    BetaStrategy beta;
    std::vector<std::string> published;  // aligned with the table's columns
    std::string init;
};

struct TableDef {
    std::string title;
    std::string problem;
    std::vector<ColumnDef> columns;
    std::vector<RowDef> rows;
    int default_trials = 100;
    std::vector<std::string> notes;
};

RowDef newton_row(std::vector<std::string> published) {
    return {"newton", Method::newton, BetaStrategy::midpoint(), std::move(published), {}};
}

RowDef qn_row(const std::string& beta, std::vector<std::string> published) {
    const BetaStrategy b = BetaStrategy::parse(beta);
    const std::string label = b.kind == BetaStrategy::Kind::fixed ? "beta=" + beta.substr(6) : beta;
    return {label, Method::quasi_newton, b, std::move(published), {}};
}

std::vector<ColumnDef> pert_columns(std::initializer_list<double> perts, int dof) {
    std::vector<ColumnDef> out;
    for (double p : perts) out.push_back({"pert=" + format("%g", p), p, dof});
    return out;
}

TableDef table_definition(int id, bool full) {
    TableDef t;
    switch (id) {
        case 1:
            t.title = "ex1, fdm, 1000 unknowns: iterations by strategy and perturbation";
            t.problem = "ex1";
            t.columns = pert_columns({0.1, 0.2, 0.5, 1.0}, 1000);
            t.rows = {newton_row({"3.8 ± 0.4", "4.0 ± 0.0", "4.3 ± 0.5", "4.7 ± 0.5"}),
                      qn_row("midpoint", {"7.6 ± 0.5", "7.8 ± 0.4", "8.1 ± 0.5", "8.3 ± 0.5"}),
                      qn_row("sum", {"7.7 ± 0.5", "7.9 ± 0.3", "8.2 ± 0.6", "8.9 ± 0.6"}),
                      qn_row("max", {"7.8 ± 0.4", "7.9 ± 0.3", "8.2 ± 0.5", "8.8 ± 0.5"}),
                      qn_row("min", {"12.4 ± 0.8", "12.6 ± 0.7", "13.4 ± 0.7", "13.9 ± 0.8"}),
                      qn_row("fixed:0.1", {"11.9 ± 0.5", "12.4 ± 0.7", "12.8 ± 0.8", "13.3 ± 0.5"}),
                      qn_row("fixed:0.5", {"10.6 ± 0.6", "10.8 ± 0.7", "11.4 ± 0.6", "11.6 ± 0.7"}),
                      qn_row("fixed:1", {"8.9 ± 0.3", "9.3 ± 0.5", "9.5 ± 0.5", "9.8 ± 0.8"}),
                      qn_row("fixed:5", {"10.8 ± 0.4", "11.3 ± 0.6", "11.8 ± 0.7", "12.2 ± 0.7"}),
                      qn_row("fixed:10", {"18.3 ± 0.8", "18.8 ± 1.0", "19.8 ± 0.9", "20.4 ± 1.1"})};
            break;
        case 2:
            t.title = "ex2, fdm, 1000 unknowns: iterations by strategy and perturbation";
            t.problem = "ex2";
            t.columns = pert_columns({0.1, 0.2, 0.3, 0.4}, 1000);
            t.rows = {newton_row({"3.9 ± 0.3", "4.3 ± 0.5", "4.3 ± 0.5", "4.6 ± 1.0"}),
                      qn_row("midpoint", {"6.6 ± 0.5", "6.7 ± 0.5", "6.9 ± 0.5", "7.2 ± 0.6"}),
                      qn_row("sum", {"", "", "", ""}),
                      qn_row("max", {"9.3 ± 0.7", "9.8 ± 0.6", "10.1 ± 0.6", "10.3 ± 0.8"}),
                      qn_row("min", {"", "", "", ""}),
                      qn_row("fixed:0.1", {"10.2 ± 0.8", "10.7 ± 0.6", "10.9 ± 0.7", "11.3 ± 0.7"}),
                      qn_row("fixed:0.5", {"13.3 ± 0.9", "13.8 ± 1.0", "14.5 ± 0.9", "14.6 ± 1.0"})};
            break;
        case 3:
            t.title = "example3, fdm, 1000 unknowns: iterations by strategy and perturbation";
            t.problem = "example3";
            t.columns = pert_columns({0.1, 0.2, 0.5, 1.0}, 1000);
            t.rows = {newton_row({"3.5 ± 0.5", "4.0 ± 0.2", "4.0 ± 0.0", "4.3 ± 0.5"}),
                      qn_row("midpoint", {"6.0 ± 0.0", "6.0 ± 0.0", "6.0 ± 0.1", "6.4 ± 0.5"}),
                      qn_row("sum", {"7.9 ± 0.3", "8.4 ± 0.6", "8.9 ± 0.4", "8.9 ± 0.5"}),
                      qn_row("max", {"8.0 ± 0.3", "8.6 ± 0.5", "8.9 ± 0.4", "9.2 ± 0.6"}),
                      qn_row("min", {"8.4 ± 0.6", "8.8 ± 0.4", "9.1 ± 0.4", "9.6 ± 0.6"}),
                      qn_row("fixed:0.1", {"8.0 ± 0.2", "8.3 ± 0.6", "8.8 ± 0.5", "8.7 ± 0.6"}),
                      qn_row("fixed:0.5", {"6.9 ± 0.3", "6.9 ± 0.2", "7.3 ± 0.5", "7.7 ± 0.5"}),
                      qn_row("fixed:1", {"6.0 ± 0.0", "6.0 ± 0.0", "6.2 ± 0.4", "6.5 ± 0.5"}),
                      qn_row("fixed:5", {"13.5 ± 0.9", "14.1 ± 0.7", "14.6 ± 0.9", "15.4 ± 0.8"}),
                      qn_row("fixed:10", {"21.5 ± 0.9", "22.1 ± 1.2", "23.3 ± 1.0", "24.2 ± 1.4"})};
            break;
        case 4:
            t.title = "ex2d1, sem:2, 50x50: iterations by strategy and perturbation";
            t.problem = "ex2d1";
            t.columns = pert_columns({0.1, 0.2, 0.5, 1.0}, 50);
            t.rows = {newton_row({"4.0 ± 0.0", "4.0 ± 0.0", "4.6 ± 0.5", "5.0 ± 0.2"}),
                      qn_row("midpoint", {"16.6 ± 0.8", "17.4 ± 0.9", "18.5 ± 0.9", "19.6 ± 1.0"}),
                      qn_row("sum", {"31.9 ± 1.5", "33.1 ± 1.9", "34.9 ± 2.1", "36.8 ± 2.2"}),
                      qn_row("max", {"31.4 ± 1.9", "32.9 ± 1.9", "35.0 ± 1.8", "37.1 ± 2.1"}),
                      qn_row("min", {"68.9 ± 3.4", "70.8 ± 3.6", "73.8 ± 4.8", "77.2 ± 4.4"}),
                      qn_row("fixed:3", {"21.5 ± 1.3", "22.4 ± 1.0", "23.3 ± 1.3", "24.1 ± 1.2"}),
                      qn_row("fixed:5", {"40.9 ± 2.6", "42.4 ± 2.8", "44.6 ± 2.2", "46.3 ± 2.7"}),
                      qn_row("fixed:7", {"60.5 ± 3.2", "62.8 ± 3.1", "66.6 ± 2.9", "68.7 ± 2.8"}),
                      qn_row("fixed:9", {"80.2 ± 3.9", "83.1 ± 4.6", "86.4 ± 5.7", "90.5 ± 5.6"}),
                      qn_row("fixed:11", {"98.0 ± 6.6", "102.4 ± 6.8", "107.5 ± 6.1", "111.5 ± 6.9"})};
            break;
        case 5:
            t.title = "ex2d1, sem:2, pert 0.1: iterations by strategy and resolution";
            t.problem = "ex2d1";
            t.columns = {{"200^2", 0.1, 200}, {"400^2", 0.1, 400}, {"800^2", 0.1, 800, true}, {"1600^2", 0.1, 1600, true}};
            t.rows = {qn_row("midpoint", {"12.5 ± 0.9", "12.7 ± 1.0", "12.8 ± 0.8", "12.9 ± 0.8"}),
                      qn_row("sum", {"23.3 ± 1.9", "23.2 ± 1.8", "23.1 ± 2.0", "23.8 ± 1.9"}),
                      qn_row("max", {"23.4 ± 1.8", "23.6 ± 1.7", "23.8 ± 1.7", "24.1 ± 1.7"}),
                      qn_row("min", {"50.9 ± 4.0", "51.3 ± 3.9", "51.8 ± 3.1", "52.4 ± 4.4"}),
                      qn_row("fixed:1", {"51.5 ± 2.9", "51.0 ± 4.3", "51.1 ± 3.5", "52.4 ± 3.7"}),
                      qn_row("fixed:3", {"16.4 ± 1.0", "16.2 ± 1.1", "16.0 ± 1.4", "16.2 ± 1.4"}),
                      qn_row("fixed:5", {"30.0 ± 2.4", "29.8 ± 3.1", "30.4 ± 2.1", "30.7 ± 2.7"}),
                      qn_row("fixed:7", {"44.7 ± 4.0", "45.0 ± 2.9", "44.2 ± 3.6", "45.5 ± 3.2"}),
                      qn_row("fixed:9", {"58.6 ± 4.3", "58.6 ± 4.8", "58.2 ± 4.8", "59.6 ± 4.8"})};
            break;
        case 6: {
            t.title = "2dex, fdm, midpoint: iterations by perturbation (200^2) and by resolution (pert 0.1)";
            t.problem = "2dex";
            t.columns = pert_columns({0.1, 0.2, 0.5, 1.0}, 200);
            t.columns.push_back({"200^2", 0.1, 200});
            t.columns.push_back({"400^2", 0.1, 400});
            t.columns.push_back({"800^2", 0.1, 800, true});
            t.columns.push_back({"1600^2", 0.1, 1600, true});
            t.rows = {qn_row("midpoint", {"24.0 ± 0.0", "22.0 ± 0.0", "25.0 ± 0.0", "26.0 ± 0.0", "24.0 ± 0.0",
                                          "23.0 ± 0.0", "21.0 ± 0.0", "23.0 ± 0.0"})};
            break;
        }
        case 7: {
            t.title = "gray_scott, fdm, damping 0.1, pert 0.01: iterations per bump initialization";
            t.problem = "gray_scott";
            t.columns = {{"200^2", 0.01, 200}, {"400^2", 0.01, 400, true}, {"800^2", 0.01, 800, true},
                         {"1600^2", 0.01, 1600, true}};
            const std::vector<std::string> published = {"4505.9", "4544.8", "4550.0", "4560.4"};
            for (const BumpPattern& b : gray_scott_patterns())
                t.rows.push_back({b.name, Method::quasi_newton, BetaStrategy::midpoint(), published, b.name});
            t.default_trials = 1;
            t.notes.push_back("published counts average eight undisclosed initializations; rows here are per pattern");
            break;
        }
        case 8: {
            const int base = full ? 200 : 64;
            t.title = "ex3d1, sem:2: iterations by strategy, perturbation (" + std::to_string(base) +
                      "^3) and resolution (pert 0.1)";
            t.problem = "ex3d1";
            t.columns = pert_columns({0.1, 0.2, 0.5, 1.0}, base);
            t.columns.push_back({"64^3", 0.1, 64});
            t.columns.push_back({"200^3", 0.1, 200, true});
            const std::string none;
            t.rows = {
                qn_row("midpoint", {"62.9 ± 1.6", "65.0 ± 1.7", "67.4 ± 1.6", "69.7 ± 1.5", none, "62.9 ± 1.8"}),
                qn_row("sum", {"129.0 ± 2.8", "133.1 ± 2.5", "138.5 ± 2.7", "142.2 ± 3.1", none, "128.8 ± 2.6"}),
                qn_row("max", {"116.8 ± 2.4", "120.4 ± 3.0", "125.4 ± 2.7", "128.8 ± 2.4", none, "117.0 ± 2.4"}),
                qn_row("fixed:175", {"124.0 ± 2.4", "127.6 ± 2.4", "131.3 ± 2.5", "134.2 ± 2.5", none, "124.3 ± 2.5"}),
                qn_row("fixed:200", {"63.0 ± 1.3", "64.7 ± 1.5", "66.2 ± 1.2", "67.8 ± 1.5", none, "62.8 ± 1.3"}),
                qn_row("fixed:250", {"67.7 ± 1.5", "69.9 ± 1.7", "72.4 ± 1.7", "74.5 ± 1.8", none, "67.7 ± 1.8"}),
                qn_row("fixed:300", {"82.1 ± 2.0", "84.4 ± 1.9", "87.8 ± 1.9", "90.1 ± 1.8", none, "82.3 ± 1.8"}),
                qn_row("fixed:350", {"95.8 ± 2.1", "98.7 ± 2.3", "103.2 ± 1.8", "105.8 ± 2.0", none, "96.2 ± 2.1"})};
            t.default_trials = 10;
            t.notes.push_back("published perturbation columns are at 200^3; 400^3 and 800^3 exceed desk memory");
            break;
        }
        case 9: {
            const int base = full ? 200 : 64;
            t.title = "ex3d2, fdm, eigen mode: iterations by perturbation (" + std::to_string(base) +
                      "^3) and resolution (pert 0.1)";
            t.problem = "ex3d2";
            t.columns = pert_columns({0.1, 0.2, 0.3}, base);
            t.columns.push_back({"64^3", 0.1, 64});
            t.columns.push_back({"200^3", 0.1, 200, true});
            t.rows = {qn_row("midpoint", {"761.4 ± 4.0", "781.7 ± 5.5", "773.7 ± 20.3", "", "761.4 ± 4.0"})};
            t.default_trials = 10;
            t.notes.push_back("published perturbation columns are at 200^3; 400^3 and 800^3 exceed desk memory");
            break;
        }
        default:
            throw ConfigError("table id must be 1..9, got " + std::to_string(id));
    }
    return t;
}

}  // namespace

TableResult reproduce_table(int id, const TableOptions& options) {
    const TableDef def = table_definition(id, options.full);
    TableResult out;
    out.id = id;
    out.title = def.title;
    out.notes = def.notes;
    const int trials = options.trials.value_or(def.default_trials);
    if (trials < 1) throw ConfigError("table: trials must be at least 1");
    if (!options.trials) out.notes.push_back("trials per cell: " + std::to_string(trials) + " (table default)");

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < def.columns.size(); ++c) {
        if (def.columns[c].full_only && !options.full)
            out.notes.push_back("column " + def.columns[c].label + " skipped (needs --full)");
        else
            kept.push_back(c);
    }

    // One discretization and reference per (resolution, initialization), shared across rows.
    std::map<std::pair<int, std::string>, PreparedProblem> cache;
    for (const RowDef& row : def.rows) {
        for (std::size_t c : kept) {
            const ColumnDef& col = def.columns[c];
            ExperimentConfig cfg;
            cfg.problem = def.problem;
            cfg.dof = {col.dof};
            cfg.init = row.init;
            cfg.method = row.method;
            cfg.beta = row.beta;
            cfg.pert = col.pert;
            cfg.trials = trials;
            cfg.seed = options.seed;
            cfg.threads = options.threads;

            TableCell cell;
            cell.row = row.label;
            cell.column = col.label;
            cell.published = c < row.published.size() ? row.published[c] : std::string();
            const auto key = std::make_pair(col.dof, row.init);
            try {
                auto it = cache.find(key);
                if (it == cache.end()) it = cache.emplace(key, prepare_problem(cfg)).first;
                cell.stats = run_experiment(cfg, it->second).stats;
            } catch (const ConfigError& e) {
                out.notes.push_back(row.label + " @ " + col.label + ": " + e.what());
                continue;
            } catch (const std::runtime_error& e) {
                out.notes.push_back(row.label + " @ " + col.label + ": " + e.what());
                continue;
            }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

void write_table_csv(std::ostream& os, const TableResult& table) {
    os << "# table " << table.id << ": " << table.title << '\n';
    for (const std::string& n : table.notes) os << "# " << n << '\n';
    os << "row,column,problem,method,beta,disc,dof,pert,trials,mean_iter,std_iter,mean_sec,std_sec,conv_rate,published_iter\n";
    for (const TableCell& c : table.cells) {
        const StatsRow& s = c.stats;
        os << c.row << ',' << c.column << ',' << s.problem << ',' << s.method << ',' << s.beta << ',' << s.disc << ','
           << s.dof << ',' << format("%g", s.pert) << ',' << s.trials << ',' << format("%.4f", s.mean_iterations)
           << ',' << format("%.4f", s.std_iterations) << ',' << format("%.6f", s.mean_seconds) << ','
           << format("%.6f", s.std_seconds) << ',' << format("%.4f", s.convergence_rate) << ',' << c.published << '\n';
    }
}

void write_table_json(std::ostream& os, const TableResult& table) {
    nlohmann::json cells = nlohmann::json::array();
    for (const TableCell& c : table.cells)
        cells.push_back({{"row", c.row}, {"column", c.column}, {"published", c.published}, {"stats", stats_json(c.stats)}});
    const nlohmann::json doc = {{"table", table.id}, {"title", table.title}, {"notes", table.notes}, {"cells", cells}};
    os << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Refinement study

std::vector<OrderRow> convergence_study(const std::string& name, const Scheme& scheme, const std::vector<int>& meshes,
                                        double tol) {
    const ProblemPreset p = preset(name);
    if (!p.spec.exact) throw ConfigError("problem '" + name + "' has no exact solution for a refinement study");
    if (meshes.size() < 2) throw ConfigError("refinement study needs at least two meshes");
    if (!(tol > 0.0)) throw ConfigError("refinement study: tol must be positive");

    std::vector<OrderRow> rows;
    for (int m : meshes) {
        if (m < 1) throw ConfigError("mesh sizes must be positive");
        const DiscreteProblem problem =
            discretize_problem(p.spec, scheme, std::vector<int>(static_cast<std::size_t>(p.spec.dim()), m));
        const State exact = sample(problem, p.spec.exact);
        SolveOptions opts;
        opts.tol = tol;
        opts.damping = p.damping;
        const SolveReport report = quasi_newton_solve(problem, exact, opts);
        if (!report.converged)
            throw NumericalError("refinement study: solve on mesh " + std::to_string(m) + " did not converge");
        OrderRow row;
        row.mesh = m;
        row.unknowns = problem.points() * problem.components();
        row.error = l2_distance(problem, exact, report.solution);
        row.iterations = report.iterations;
        row.order = rows.empty() ? kNaN
                                 : std::log(rows.back().error / row.error) /
                                       std::log(static_cast<double>(m) / static_cast<double>(rows.back().mesh));
        rows.push_back(row);
    }
    return rows;
}

void write_order_csv(std::ostream& os, const std::vector<OrderRow>& rows) {
    os << "mesh,unknowns,error,order,iterations\n";
    for (const OrderRow& r : rows)
        os << r.mesh << ',' << r.unknowns << ',' << format("%.6e", r.error) << ',' << format("%.4f", r.order) << ','
           << r.iterations << '\n';
}

}  // namespace qnsolve
