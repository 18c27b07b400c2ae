#include "stochmatch/pipeline.hpp"

#include <stdexcept>

#include "stochmatch/lp.hpp"

namespace stochmatch {

PipelineResult run_pipeline(const Instance& inst,
                            const PipelineConfig& config) {
    {
        const ValidationReport report = validate_instance(inst);
        if (!report.ok()) {
            throw std::invalid_argument("invalid instance: " +
                                        report.to_string());
        }
    }
    PipelineResult result;
    const lp::MatchingLp model = lp::build_surplus_matching(inst);
    const lp::LpSolution solution = lp::solve(model.problem);
    if (solution.status != lp::LpStatus::Optimal) {
        // The zero solution is always feasible and the objective is capped,
        // so anything but Optimal means the solver itself went wrong.
        throw std::logic_error("LP solve failed on a feasible bounded "
                               "problem");
    }
    result.lp_objective = solution.objective;
    result.matching = lp::extract_matching(model, solution);
    result.pre = preprocess(inst, result.matching, config.t0, config.t1);

    const std::vector<double> grid = uniform_grid(config.grid_points);
    MonteCarloOptions options;
    options.with_opt = config.with_opt;
    options.threads = config.threads;
    result.multistage = monte_carlo(result.pre.pinst, Policy::Multistage,
                                    config.trials, config.seed, grid, options);
    result.suggested = monte_carlo(result.pre.pinst, Policy::Suggested,
                                   config.trials, config.seed, grid, options);
    return result;
}

} // namespace stochmatch
