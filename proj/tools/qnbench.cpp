// qnbench: seeded solver experiments and table reproduction for the qnsolve presets.

#include "qnsolve/bench.hpp"
#include "qnsolve/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

using namespace qnsolve;

struct Options {
    std::string problem = "ex1";
    std::string method = "qn";
    std::string beta = "midpoint";
    std::string disc;
    std::string dof;
    std::string init;
    double pert = 0.1;
    double solve_pert = 0.0;
    int trials = 100;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    int max_iter = 10000;
    std::optional<double> damping;
    int threads = 1;
    std::string out;
    std::string format = "csv";
    int table_id = 0;
    bool full = false;
    std::string meshes;
    std::optional<int> table_trials;
};

ExperimentConfig to_config(const Options& o) {
    ExperimentConfig cfg;
    cfg.problem = o.problem;
    if (!o.disc.empty()) cfg.scheme = Scheme::parse(o.disc);
    if (!o.dof.empty()) cfg.dof = parse_int_list(o.dof);
    cfg.init = o.init;
    cfg.method = parse_method(o.method);
    cfg.beta = BetaStrategy::parse(o.beta);
    cfg.pert = o.pert;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.tol = o.tol;
    cfg.max_iter = o.max_iter;
    cfg.damping = o.damping;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

// Opens --out, or returns stdout when it is empty.
std::unique_ptr<std::ofstream> open_out(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw ConfigError("cannot open '" + path + "' for writing");
    return f;
}

int run_solve(const Options& o) {
    ExperimentConfig cfg = to_config(o);
    cfg.pert = o.solve_pert;
    const ProblemPreset p = preset(cfg.problem);
    const Scheme scheme = cfg.scheme.value_or(p.scheme);
    const DiscreteProblem problem = discretize_problem(p.spec, scheme, mesh_for_preset(p, scheme, cfg.dof.empty() ? p.dof : cfg.dof));

    State u;
    if (!cfg.init.empty()) {
        const auto patterns = gray_scott_patterns();
        const auto it = std::find_if(patterns.begin(), patterns.end(), [&](const BumpPattern& b) { return b.name == cfg.init; });
        if (it == patterns.end()) throw ConfigError("unknown pattern '" + cfg.init + "'");
        u = gray_scott_initial_state(problem, *it);
    } else if (p.initial_guess) {
        u = sample(problem, p.initial_guess);
    } else {
        u = sample(problem, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); });
    }
    if (cfg.pert > 0.0) {
        const State delta = perturbation_state(problem, cfg.seed, cfg.pert);
        for (std::size_t c = 0; c < u.size(); ++c) u[c].values() += delta[c].values();
    }

    SolveOptions opts;
    opts.beta = cfg.beta;
    opts.tol = cfg.tol.value_or(p.tol);
    opts.max_iter = cfg.max_iter;
    opts.damping = cfg.damping.value_or(p.damping);
    if (cfg.method == Method::newton && p.eigen_mode) throw ConfigError("newton is not available in eigen mode");
    const SolveReport r = cfg.method == Method::newton ? newton_solve(problem, std::move(u), opts)
                          : p.eigen_mode             ? eigen_mode_solve(problem, std::move(u), opts)
                                                     : quasi_newton_solve(problem, std::move(u), opts);

    std::printf("problem     %s (%s)\n", p.name.c_str(), problem.scheme.label().c_str());
    std::printf("unknowns    %ld\n", static_cast<long>(problem.points() * problem.components()));
    std::printf("converged   %s\n", r.converged ? "yes" : "no");
    std::printf("iterations  %d\n", r.iterations);
    std::printf("residual    %.6e\n", r.final_residual());
    std::printf("seconds     %.3f\n", r.wall_seconds);
    if (!r.lambda_history.empty()) std::printf("lambda      %.12g\n", r.lambda_history.back());
    if (p.spec.exact) std::printf("l2 error    %.6e\n", l2_distance(problem, sample(problem, p.spec.exact), r.solution));
    if (auto f = open_out(o.out)) write_field(*f, r.solution);
    return r.converged ? 0 : 3;
}

int run_experiment_cmd(const Options& o) {
    const ExperimentConfig cfg = to_config(o);
    const ExperimentResult result = run_experiment(cfg);
    auto f = open_out(o.out);
    std::ostream& os = f ? *f : std::cout;
    if (o.format == "json") {
        write_experiment_json(os, result);
    } else {
        write_trials_csv(os, result);
        if (f) {
            std::filesystem::path stats = o.out;
            stats.replace_extension(".stats.csv");
            std::ofstream sf(stats);
            if (!sf) throw ConfigError("cannot open '" + stats.string() + "' for writing");
            write_stats_csv(sf, {result.stats});
        } else {
            os << '\n';
            write_stats_csv(os, {result.stats});
        }
    }
    const StatsRow& s = result.stats;
    std::fprintf(stderr, "%s %s beta=%s %s dof=%s pert=%g: %.2f +- %.2f iterations, conv %.2f\n", s.problem.c_str(),
                 s.method.c_str(), s.beta.c_str(), s.disc.c_str(), s.dof.c_str(), s.pert, s.mean_iterations,
                 s.std_iterations, s.convergence_rate);
    return 0;
}

int run_table(const Options& o) {
    TableOptions t;
    t.full = o.full;
    t.trials = o.table_trials;
    t.seed = o.seed;
    t.threads = o.threads;
    const TableResult table = reproduce_table(o.table_id, t);
    auto f = open_out(o.out);
    std::ostream& os = f ? *f : std::cout;
    if (o.format == "json")
        write_table_json(os, table);
    else
        write_table_csv(os, table);
    return 0;
}

int run_order(const Options& o) {
    const ProblemPreset p = preset(o.problem);
    const Scheme scheme = o.disc.empty() ? p.scheme : Scheme::parse(o.disc);
    const std::vector<OrderRow> rows = convergence_study(o.problem, scheme, parse_int_list(o.meshes), o.tol.value_or(1e-10));
    auto f = open_out(o.out);
    write_order_csv(f ? *f : std::cout, rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qnbench: quasi-Newton experiments on tensor-product elliptic problems"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--problem", o.problem, "preset name")->capture_default_str();
        sub->add_option("--disc", o.disc, "fdm or sem:<k> (preset default)");
        sub->add_option("--dof", o.dof, "unknowns per axis: n[,n[,n]]");
        sub->add_option("--tol", o.tol, "residual tolerance (preset default)");
        sub->add_option("--out", o.out, "output path (stdout when omitted)");
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--method", o.method, "qn or newton")->capture_default_str();
        sub->add_option("--beta", o.beta, "midpoint|sum|max|min|fixed:<v>")->capture_default_str();
        sub->add_option("--init", o.init, "gray_scott bump pattern");
        sub->add_option("--seed", o.seed, "base seed")->capture_default_str();
        sub->add_option("--max-iter", o.max_iter, "iteration cap")->capture_default_str();
        sub->add_option("--damping", o.damping, "step size in (0, 1] (preset default)");
    };

    CLI::App* solve = app.add_subcommand("solve", "single solve from the preset initial guess");
    add_common(solve);
    add_solver(solve);
    solve->add_option("--pert", o.solve_pert, "perturbation added to the initial guess")->capture_default_str();

    CLI::App* experiment = app.add_subcommand("experiment", "seeded trials around the reference solution");
    add_common(experiment);
    add_solver(experiment);
    experiment->add_option("--pert", o.pert, "perturbation scale")->capture_default_str();
    experiment->add_option("--trials", o.trials, "number of trials")->capture_default_str();
    experiment->add_option("--threads", o.threads, "worker threads")->capture_default_str();
    experiment->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    CLI::App* table = app.add_subcommand("table", "reproduce one of the published tables");
    table->add_option("--id", o.table_id, "table 1..9")->required();
    table->add_flag("--full", o.full, "run full-size columns");
    table->add_option("--trials", o.table_trials, "trials per cell (table default)");
    table->add_option("--seed", o.seed, "base seed");
    table->add_option("--threads", o.threads, "worker threads");
    table->add_option("--out", o.out, "output path (stdout when omitted)");
    table->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* order = app.add_subcommand("order", "refinement study against the exact solution");
    add_common(order);
    order->add_option("--mesh", o.meshes, "mesh sizes, e.g. 4,8,16")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(o);
        if (experiment->parsed()) return run_experiment_cmd(o);
        if (table->parsed()) return run_table(o);
        return run_order(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
