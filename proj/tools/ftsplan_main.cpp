#include "fts/io.hpp"
#include "fts/planners.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

// Exit codes: 0 solved/ok, 1 usage or parse error, 2 infeasible, 3 timeout,
// 4 plan validation failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitInvalidPlan = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("FTSPLAN_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

struct SolveArgs {
    std::string problem_path;
    std::string algo = "focused";
    std::string search = "hff";
    std::uint64_t seed = default_seed();
    double timeout_s = 120;
    double weight = 1.0;
    bool no_axioms = false;
    bool trace = false;
    bool strict_lazy = false;
    bool timing = false;
};

fts::PlannerConfig make_config(const SolveArgs& args) {
    fts::PlannerConfig config;
    config.search = args.search == "bfs" ? fts::SearchKind::bfs : fts::SearchKind::hff;
    config.seed = args.seed;
    config.timeout_s = args.timeout_s;
    config.lazy_cost_weight = args.weight;
    config.use_axioms = !args.no_axioms;
    config.trace = args.trace;
    if (args.strict_lazy) {
        config.lazy_naming = fts::LazyNaming::per_sampler;
        config.defer_new_elements = true;
    }
    return config;
}

int run_solve(const SolveArgs& args) {
    fts::io::ProblemFile file = fts::io::parse_problem(read_file(args.problem_path));
    fts::domains::BuiltProblem built = fts::io::build_problem(file);
    fts::PlannerConfig config = make_config(args);
    fts::PlannerResult result = args.algo == "incremental"
                                    ? fts::incremental(built.problem, built.samplers, config)
                                    : fts::focused(built.problem, built.samplers, config);
    fts::io::ReportOptions report_options;
    report_options.include_timing = args.timing;
    std::cout << fts::io::format_report(result, config, args.algo, report_options);
    if (args.trace) {
        for (const fts::IterationTrace& t : result.stats.trace) {
            std::cerr << "iter " << t.iteration << " episode " << t.episode << " elements "
                      << t.elements << (t.search_found ? " plan" : " no-plan") << "\n";
            for (const std::string& d : t.draws)
                std::cerr << "  draw " << d << "\n";
        }
    }
    switch (result.outcome) {
    case fts::PlanOutcome::solved:
        return kExitOk;
    case fts::PlanOutcome::infeasible:
        return kExitInfeasible;
    case fts::PlanOutcome::timeout:
        return kExitTimeout;
    }
    return kExitUsage;
}

int run_validate(const std::string& problem_path, const std::string& plan_path) {
    fts::io::ProblemFile file = fts::io::parse_problem(read_file(problem_path));
    fts::domains::BuiltProblem built = fts::io::build_problem(file);
    fts::Plan plan = fts::io::parse_plan(read_file(plan_path), *built.problem.system);
    fts::ValidationResult result = fts::validate_plan(built.problem, plan);
    if (result.ok) {
        std::cout << "valid\n";
        return kExitOk;
    }
    std::cout << "invalid: step " << result.violation->step << " constraint "
              << result.violation->constraint << ": " << result.violation->message << "\n";
    return kExitInvalidPlan;
}

struct BenchArgs {
    std::string experiment = "distractors";
    std::vector<int> sizes = {0, 10, 40};
    int trials = 5;
    std::vector<std::string> algos = {"incremental", "focused"};
    std::string search = "hff";
    double timeout_s = 120;
    std::uint64_t seed = default_seed();
    bool timing = true;
};

int run_bench(const BenchArgs& args) {
    std::vector<std::string> rows;
    for (int size : args.sizes) {
        for (int trial = 0; trial < args.trials; ++trial) {
            fts::domains::BenchmarkSpec spec{args.experiment, size,
                                             fts::stable_hash_combine(args.seed, trial)};
            fts::domains::BuiltProblem built = fts::domains::generate_benchmark(spec);
            for (const std::string& algo : args.algos) {
                SolveArgs solve;
                solve.algo = algo;
                solve.search = args.search;
                solve.seed = spec.seed;
                solve.timeout_s = args.timeout_s;
                fts::PlannerConfig config = make_config(solve);
                fts::PlannerResult result =
                    algo == "incremental" ? fts::incremental(built.problem, built.samplers, config)
                                          : fts::focused(built.problem, built.samplers, config);
                long long calls = 0;
                for (const auto& [name, count] : result.stats.sampler_calls)
                    calls += count;
                std::string outcome = result.outcome == fts::PlanOutcome::solved ? "solved"
                                      : result.outcome == fts::PlanOutcome::infeasible
                                          ? "infeasible"
                                          : "timeout";
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.3f",
                              args.timing ? result.stats.total_seconds : 0.0);
                rows.push_back(args.experiment + "," + std::to_string(size) + "," +
                               std::to_string(trial) + "," + algo + "," + outcome + "," + buf +
                               "," + std::to_string(calls));
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    std::cout << "experiment,size,trial,algo,outcome,seconds,sampler_calls\n";
    for (const std::string& row : rows)
        std::cout << row << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based planner for factored transition systems"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "Solve a problem file and print a run report");
    solve->add_option("problem", solve_args.problem_path, "problem JSON file")->required();
    solve->add_option("--algo", solve_args.algo, "incremental|focused")
        ->check(CLI::IsMember({"incremental", "focused"}));
    solve->add_option("--search", solve_args.search, "bfs|hff")
        ->check(CLI::IsMember({"bfs", "hff"}));
    solve->add_option("--seed", solve_args.seed, "random seed (default $FTSPLAN_SEED or 0)");
    solve->add_option("--timeout-s", solve_args.timeout_s, "wall-clock limit in seconds");
    solve->add_option("--weight", solve_args.weight, "lazy-cost weight for hff search");
    solve->add_flag("--no-axioms", solve_args.no_axioms, "ground without derived variables");
    solve->add_flag("--trace", solve_args.trace, "log per-iteration sampler draws to stderr");
    solve->add_flag("--strict-lazy", solve_args.strict_lazy,
                    "per-sampler placeholders and episode-deferred elements");
    solve->add_flag("--timing", solve_args.timing, "include wall-clock time in the report");

    std::string validate_problem, validate_plan_path;
    CLI::App* validate = app.add_subcommand("validate", "Validate a plan against a problem");
    validate->add_option("problem", validate_problem, "problem JSON file")->required();
    validate->add_option("plan", validate_plan_path, "plan or report JSON file")->required();

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark grid and print CSV rows");
    bench->add_option("--experiment", bench_args.experiment, "tabletop-grid|distractors|clear-table")
        ->check(CLI::IsMember({"tabletop-grid", "distractors", "clear-table"}));
    bench->add_option("--sizes", bench_args.sizes, "problem sizes");
    bench->add_option("--trials", bench_args.trials, "trials per size");
    bench->add_option("--algos", bench_args.algos, "algorithms to run");
    bench->add_option("--search", bench_args.search, "bfs|hff")
        ->check(CLI::IsMember({"bfs", "hff"}));
    bench->add_option("--timeout-s", bench_args.timeout_s, "per-run limit");
    bench->add_option("--seed", bench_args.seed, "base seed");
    bench->add_flag("!--no-time", bench_args.timing, "zero the seconds column (for diffing)");

    fts::domains::BenchmarkSpec gen_spec;
    std::string gen_out;
    CLI::App* gen = app.add_subcommand("gen", "Generate a benchmark problem file");
    gen->add_option("--experiment", gen_spec.experiment, "benchmark family")
        ->required()
        ->check(CLI::IsMember({"tabletop-grid", "distractors", "clear-table"}));
    gen->add_option("--size", gen_spec.size, "problem size")->required();
    gen->add_option("--seed", gen_spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (solve->parsed())
            return run_solve(solve_args);
        if (validate->parsed())
            return run_validate(validate_problem, validate_plan_path);
        if (bench->parsed())
            return run_bench(bench_args);
        if (gen->parsed()) {
            fts::domains::Tabletop2DDomain domain = fts::domains::generate_benchmark_domain(gen_spec);
            std::string text = fts::io::format_problem(fts::io::problem_file_from_tabletop2d(domain));
            if (gen_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(gen_out);
                out << text;
            }
            return kExitOk;
        }
    } catch (const fts::io::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
