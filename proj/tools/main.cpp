#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochmatch/bounds.hpp"
#include "stochmatch/engine.hpp"
#include "stochmatch/instance.hpp"
#include "stochmatch/json_io.hpp"
#include "stochmatch/lp.hpp"
#include "stochmatch/pipeline.hpp"
#include "stochmatch/preprocess.hpp"

namespace {

using namespace stochmatch;
using nlohmann::ordered_json;

/// Worker-thread cap from the environment; 0 (or unset) means automatic.
int env_threads() {
    const char* raw = std::getenv("STOCHMATCH_THREADS");
    if (!raw || !*raw) return 0;
    char* end = nullptr;
    const long value = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || value < 0) {
        throw std::invalid_argument(
            "STOCHMATCH_THREADS must be a nonnegative integer");
    }
    return static_cast<int>(value);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void require_valid(const Instance& inst) {
    const ValidationReport report = validate_instance(inst);
    if (!report.ok()) {
        throw std::invalid_argument("invalid instance: " + report.to_string());
    }
}

/// Writes to the path when given, otherwise prints to standard output.
void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << '\n';
    } else {
        write_file(path, text + "\n");
    }
}

struct ValidateArgs {
    std::string instance;
    std::string matching;
};

int cmd_validate(const ValidateArgs& args) {
    const Instance inst = load_instance(args.instance);
    ValidationReport report = validate_instance(inst);
    if (!args.matching.empty()) {
        const FractionalMatching fm = load_matching(args.matching);
        if (report.ok()) {
            const ValidationReport mrep = validate_matching(inst, fm);
            for (const auto& message : mrep.errors) report.fail(message);
        }
    }
    ordered_json doc;
    doc["ok"] = report.ok();
    doc["errors"] = report.errors;
    std::cout << doc.dump(2) << '\n';
    return report.ok() ? 0 : 1;
}

struct SolveLpArgs {
    std::string instance;
    std::string out;
    bool basic = false;
    bool dump_lp = false;
};

int cmd_solve_lp(const SolveLpArgs& args) {
    const Instance inst = load_instance(args.instance);
    require_valid(inst);
    const lp::MatchingLp model =
        args.basic ? lp::build_basic_matching(inst) : lp::build_surplus_matching(inst);
    if (args.dump_lp) std::cerr << lp::dump(model.problem);
    const lp::LpSolution solution = lp::solve(model.problem);
    if (solution.status != lp::LpStatus::Optimal) {
        throw std::logic_error("LP solve failed on a feasible bounded problem");
    }
    std::cerr << "objective = " << format_double(solution.objective) << '\n';
    const FractionalMatching fm = lp::extract_matching(model, solution);
    emit(to_json(fm), args.out);
    return 0;
}

struct PreprocessArgs {
    std::string instance;
    std::string matching;
    std::string out;
    std::string step = "all";
    double t0 = 0.05;
    double t1 = 0.75;
};

int cmd_preprocess(const PreprocessArgs& args) {
    const Instance inst = load_instance(args.instance);
    const FractionalMatching fm = load_matching(args.matching);
    const std::string instance_path = args.out + ".instance.json";
    const std::string matching_path = args.out + ".matching.json";
    const std::string split_path = args.out + ".split.json";
    if (args.step == "pad-online" || args.step == "pad-offline") {
        const PaddedResult result = args.step == "pad-online"
                                        ? pad_online(inst, fm)
                                        : pad_offline(inst, fm);
        save_instance(instance_path, result.inst);
        save_matching(matching_path, result.fm);
    } else if (args.step == "split") {
        const SplitResult result = split_types(inst, fm);
        save_instance(instance_path, result.inst);
        save_matching(matching_path, result.fm);
        save_split_map(split_path, result.split);
    } else {
        const PreprocessResult result = preprocess(inst, fm, args.t0, args.t1);
        save_instance(instance_path, result.pinst.inst);
        save_matching(matching_path, result.pinst.matching);
        save_split_map(split_path, result.split);
    }
    return 0;
}

struct SimulateArgs {
    std::string instance;
    std::string matching;
    std::string policy = "multistage";
    long long trials = 1000;
    std::uint64_t seed = 0;
    double t0 = 0.05;
    double t1 = 0.75;
    int grid_points = 21;
    bool with_opt = false;
    std::string csv;
    std::string json;
};

int cmd_simulate(const SimulateArgs& args) {
    const Instance inst = load_instance(args.instance);
    const FractionalMatching fm = load_matching(args.matching);
    const PreprocessedInstance pinst = classify(inst, fm, args.t0, args.t1);
    MonteCarloOptions options;
    options.with_opt = args.with_opt;
    options.threads = env_threads();
    const Policy policy = args.policy == "multistage" ? Policy::Multistage
                                                      : Policy::Suggested;
    const RunStats stats =
        monte_carlo(pinst, policy, args.trials, args.seed,
                    uniform_grid(args.grid_points), options);
    if (!args.csv.empty()) write_file(args.csv, stats_to_csv(stats));
    if (!args.json.empty()) write_file(args.json, stats_to_json(stats) + "\n");
    if (args.csv.empty() && args.json.empty()) {
        std::cout << stats_to_json(stats) << '\n';
    }
    return 0;
}

struct PipelineArgs {
    std::string instance;
    std::string out;
    long long trials = 1000;
    std::uint64_t seed = 0;
    double t0 = 0.05;
    double t1 = 0.75;
    int grid_points = 21;
    bool with_opt = false;
};

ordered_json stats_summary(const RunStats& stats) {
    double min_ratio = std::numeric_limits<double>::infinity();
    double min_bound = std::numeric_limits<double>::infinity();
    for (const auto& edge : stats.edges) {
        min_ratio = std::min(min_ratio, edge.ratio);
        min_bound = std::min(min_bound, edge.bound);
    }
    if (stats.edges.empty()) min_ratio = min_bound = 0.0;
    ordered_json doc;
    doc["mean_weight"] = stats.mean_weight;
    doc["weight_stderr"] = stats.weight_std_error;
    doc["min_edge_ratio"] = min_ratio;
    doc["min_edge_bound"] = min_bound;
    if (stats.has_opt) {
        doc["mean_opt"] = stats.mean_opt;
        doc["opt_stderr"] = stats.opt_std_error;
    }
    return doc;
}

int cmd_pipeline(const PipelineArgs& args) {
    const Instance inst = load_instance(args.instance);
    PipelineConfig config;
    config.trials = args.trials;
    config.seed = args.seed;
    config.t0 = args.t0;
    config.t1 = args.t1;
    config.grid_points = args.grid_points;
    config.with_opt = args.with_opt;
    config.threads = env_threads();
    const PipelineResult result = run_pipeline(inst, config);

    save_matching(args.out + ".matching.json", result.matching);
    save_instance(args.out + ".preprocessed.instance.json",
                  result.pre.pinst.inst);
    save_matching(args.out + ".preprocessed.matching.json",
                  result.pre.pinst.matching);
    save_split_map(args.out + ".split.json", result.pre.split);
    write_file(args.out + ".multistage.csv", stats_to_csv(result.multistage));
    write_file(args.out + ".multistage.json",
               stats_to_json(result.multistage) + "\n");
    write_file(args.out + ".suggested.csv", stats_to_csv(result.suggested));
    write_file(args.out + ".suggested.json",
               stats_to_json(result.suggested) + "\n");

    ordered_json summary;
    summary["lp_objective"] = result.lp_objective;
    summary["t0"] = args.t0;
    summary["t1"] = args.t1;
    summary["trials"] = args.trials;
    summary["seed"] = args.seed;
    summary["grid_points"] = args.grid_points;
    summary["multistage"] = stats_summary(result.multistage);
    summary["suggested"] = stats_summary(result.suggested);
    const std::string text = summary.dump(2);
    write_file(args.out + ".summary.json", text + "\n");
    std::cout << text << '\n';
    return 0;
}

struct BoundsArgs {
    double t0 = 0.05;
    double t1 = 0.75;
    int grid = 10001;
    bool search = false;
    std::string csv;
    std::string json;
};

int cmd_bounds(const BoundsArgs& args) {
    const bounds::RatioCurve curve = bounds::min_ratio(args.t0, args.t1,
                                                       args.grid);
    const bounds::MonotonicityReport cert = bounds::monotonicity_check(args.grid);
    ordered_json doc;
    doc["t0"] = curve.t0;
    doc["t1"] = curve.t1;
    doc["grid_size"] = args.grid;
    doc["r1_min"] = curve.r1_min;
    doc["r1_argmin"] = curve.r1_argmin;
    doc["r2_min"] = curve.r2_min;
    doc["r2_argmin"] = curve.r2_argmin;
    doc["min_ratio"] = curve.min_value();
    doc["r1_nonincreasing"] = curve.r1_nonincreasing;
    doc["r2_nonincreasing"] = curve.r2_nonincreasing;
    doc["certificate"] = {{"grid_size", cert.grid_size},
                       {"lhs_min", cert.lhs_min},
                       {"lhs_argmin", cert.lhs_argmin},
                       {"rhs_low_bound", cert.rhs_low_bound},
                       {"rhs_high_bound", cert.rhs_high_bound},
                       {"min_gap", cert.min_gap},
                       {"sum_nonincreasing", cert.sum_nonincreasing},
                       {"tail_nonincreasing", cert.tail_nonincreasing},
                       {"pointwise", cert.pointwise},
                       {"bounded", cert.bounded},
                       {"pass", cert.pass()}};
    if (args.search) {
        const bounds::ParamSearchResult found =
            bounds::search_params(0.0, 0.2, 0.5, 1.0, 0.01);
        doc["search"] = {{"t0", found.t0},
                         {"t1", found.t1},
                         {"ratio", found.ratio},
                         {"cells", found.cells}};
    }
    if (!args.csv.empty()) {
        std::string table = "y,r1,r2\n";
        for (std::size_t k = 0; k < curve.y.size(); ++k) {
            table += format_double(curve.y[k]);
            table += ',';
            table += format_double(curve.r1[k]);
            table += ',';
            table += format_double(curve.r2[k]);
            table += '\n';
        }
        write_file(args.csv, table);
    }
    if (!args.json.empty()) write_file(args.json, doc.dump(2) + "\n");
    if (args.json.empty()) std::cout << doc.dump(2) << '\n';
    return 0;
}

struct SearchArgs {
    double t0_lo = 0.0;
    double t0_hi = 0.2;
    double t1_lo = 0.5;
    double t1_hi = 1.0;
    double step = 0.01;
    int grid = 2001;
};

int cmd_search_params(const SearchArgs& args) {
    const bounds::ParamSearchResult found =
        bounds::search_params(args.t0_lo, args.t0_hi, args.t1_lo, args.t1_hi,
                              args.step, args.grid);
    ordered_json doc;
    doc["t0"] = found.t0;
    doc["t1"] = found.t1;
    doc["ratio"] = found.ratio;
    doc["cells"] = found.cells;
    std::cout << doc.dump(2) << '\n';
    return 0;
}

struct OptArgs {
    std::string instance;
    long long trials = 1;
    std::uint64_t seed = 0;
    std::string json;
};

int cmd_opt(const OptArgs& args) {
    const Instance inst = load_instance(args.instance);
    require_valid(inst);
    if (args.trials < 1) {
        throw std::invalid_argument("need at least one trial");
    }
    double sum = 0.0, sum_sq = 0.0;
    for (long long rep = 0; rep < args.trials; ++rep) {
        const ArrivalSequence arr =
            sample_arrivals(inst, args.seed, static_cast<std::uint64_t>(rep));
        const double value = offline_optimum(inst, arr);
        sum += value;
        sum_sq += value * value;
    }
    const double n = static_cast<double>(args.trials);
    const double mean = sum / n;
    double std_error = 0.0;
    if (args.trials > 1) {
        const double var = std::max(sum_sq - sum * sum / n, 0.0) / (n - 1.0);
        std_error = std::sqrt(var / n);
    }
    ordered_json doc;
    doc["trials"] = args.trials;
    doc["seed"] = args.seed;
    doc["mean_opt"] = mean;
    doc["opt_stderr"] = std_error;
    emit(doc.dump(2), args.json);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-weighted online stochastic matching: LP solving, "
                 "preprocessing, staged-policy simulation and closed-form "
                 "ratio bounds"};
    app.require_subcommand(1);

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand(
        "validate", "Check an instance (and optionally a matching) and "
                    "print a JSON report");
    validate->add_option("instance", validate_args.instance, "instance JSON")
        ->required();
    validate->add_option("--matching", validate_args.matching,
                         "fractional matching JSON to check against the "
                         "instance, including the surplus constraint");

    SolveLpArgs solve_args;
    auto* solve_lp = app.add_subcommand(
        "solve-lp", "Solve the surplus-constrained matching LP (or the "
                    "plain one with --basic) and write the optimal "
                    "fractional matching");
    solve_lp->add_option("instance", solve_args.instance, "instance JSON")
        ->required();
    solve_lp->add_option("-o,--out", solve_args.out,
                         "output path (default: standard output)");
    solve_lp->add_flag("--basic", solve_args.basic,
                       "drop the surplus constraint");
    solve_lp->add_flag("--dump-lp", solve_args.dump_lp,
                       "print the LP in readable form to standard error");

    PreprocessArgs preprocess_args;
    auto* preprocess_cmd = app.add_subcommand(
        "preprocess", "Transform a feasible matching into the two-class "
                      "shape (or run a single step)");
    preprocess_cmd
        ->add_option("instance", preprocess_args.instance, "instance JSON")
        ->required();
    preprocess_cmd
        ->add_option("--matching", preprocess_args.matching,
                     "fractional matching JSON")
        ->required();
    preprocess_cmd
        ->add_option("-o,--out", preprocess_args.out,
                     "output prefix; writes PREFIX.instance.json, "
                     "PREFIX.matching.json and, for split/all, "
                     "PREFIX.split.json")
        ->required();
    preprocess_cmd
        ->add_option("--step", preprocess_args.step,
                     "pad-online, pad-offline, split, or all")
        ->check(CLI::IsMember({"pad-online", "pad-offline", "split", "all"}));
    preprocess_cmd->add_option("--t0", preprocess_args.t0,
                               "first stage boundary (step=all)");
    preprocess_cmd->add_option("--t1", preprocess_args.t1,
                               "second stage boundary (step=all)");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand(
        "simulate", "Monte Carlo a policy on an already-preprocessed "
                    "instance and report per-edge statistics");
    simulate->add_option("instance", simulate_args.instance, "instance JSON")
        ->required();
    simulate
        ->add_option("--matching", simulate_args.matching,
                     "fractional matching JSON in two-class shape")
        ->required();
    simulate
        ->add_option("--policy", simulate_args.policy,
                     "multistage or suggested")
        ->check(CLI::IsMember({"multistage", "suggested"}));
    simulate->add_option("--trials", simulate_args.trials, "replications");
    simulate->add_option("--seed", simulate_args.seed, "generator seed");
    simulate->add_option("--t0", simulate_args.t0, "first stage boundary");
    simulate->add_option("--t1", simulate_args.t1, "second stage boundary");
    simulate->add_option("--grid-points", simulate_args.grid_points,
                         "survival-curve grid size");
    simulate->add_flag("--with-opt", simulate_args.with_opt,
                       "also average the per-realization offline optimum");
    simulate->add_option("--csv", simulate_args.csv, "per-edge CSV path");
    simulate->add_option("--json", simulate_args.json, "full report path");

    PipelineArgs pipeline_args;
    auto* pipeline = app.add_subcommand(
        "pipeline", "Solve the LP, preprocess, and Monte Carlo both "
                    "policies; write all artifacts under a prefix");
    pipeline->add_option("instance", pipeline_args.instance, "instance JSON")
        ->required();
    pipeline->add_option("-o,--out", pipeline_args.out, "output prefix")
        ->required();
    pipeline->add_option("--trials", pipeline_args.trials, "replications");
    pipeline->add_option("--seed", pipeline_args.seed, "generator seed");
    pipeline->add_option("--t0", pipeline_args.t0, "first stage boundary");
    pipeline->add_option("--t1", pipeline_args.t1, "second stage boundary");
    pipeline->add_option("--grid-points", pipeline_args.grid_points,
                         "survival-curve grid size");
    pipeline->add_flag("--with-opt", pipeline_args.with_opt,
                       "also average the per-realization offline optimum");

    BoundsArgs bounds_args;
    auto* bounds_cmd = app.add_subcommand(
        "bounds", "Evaluate the closed-form ratio curves and the "
                  "monotonicity certificate");
    bounds_cmd->add_option("--t0", bounds_args.t0, "first stage boundary");
    bounds_cmd->add_option("--t1", bounds_args.t1, "second stage boundary");
    bounds_cmd->add_option("--grid", bounds_args.grid, "evaluation grid size");
    bounds_cmd->add_flag("--search", bounds_args.search,
                         "also search stage boundaries on the default grid");
    bounds_cmd->add_option("--csv", bounds_args.csv,
                           "write the y/r1/r2 table to this path");
    bounds_cmd->add_option("--json", bounds_args.json, "full report path");

    SearchArgs search_args;
    auto* search = app.add_subcommand(
        "search-params", "Grid-search stage boundaries for the best "
                         "guaranteed ratio");
    search->add_option("--t0-min", search_args.t0_lo, "t0 range start");
    search->add_option("--t0-max", search_args.t0_hi, "t0 range end");
    search->add_option("--t1-min", search_args.t1_lo, "t1 range start");
    search->add_option("--t1-max", search_args.t1_hi, "t1 range end");
    search->add_option("--step", search_args.step, "grid step");
    search->add_option("--grid", search_args.grid,
                       "y-grid size per evaluation");

    OptArgs opt_args;
    auto* opt = app.add_subcommand(
        "opt", "Average the offline optimum over sampled arrival "
               "realizations");
    opt->add_option("instance", opt_args.instance, "instance JSON")
        ->required();
    opt->add_option("--trials", opt_args.trials, "replications");
    opt->add_option("--seed", opt_args.seed, "generator seed");
    opt->add_option("--json", opt_args.json,
                    "output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_args);
        if (solve_lp->parsed()) return cmd_solve_lp(solve_args);
        if (preprocess_cmd->parsed()) return cmd_preprocess(preprocess_args);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (pipeline->parsed()) return cmd_pipeline(pipeline_args);
        if (bounds_cmd->parsed()) return cmd_bounds(bounds_args);
        if (search->parsed()) return cmd_search_params(search_args);
        if (opt->parsed()) return cmd_opt(opt_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
