#pragma once

#include <cstdint>

#include "stochmatch/engine.hpp"
#include "stochmatch/instance.hpp"
#include "stochmatch/preprocess.hpp"

namespace stochmatch {

/// Knobs for the end-to-end run. Defaults are the standard operating
/// point: stage cuts (0.05, 0.75) and a 21-point reporting grid.
struct PipelineConfig {
    long long trials = 1000;
    std::uint64_t seed = 0;
    double t0 = 0.05;
    double t1 = 0.75;
    int grid_points = 21;
    bool with_opt = false;
    int threads = 0;
};

/// Everything the end-to-end run produces, stage by stage.
struct PipelineResult {
    double lp_objective = 0.0;
    FractionalMatching matching; ///< optimal surplus-constrained solution
    PreprocessResult pre;
    RunStats multistage;
    RunStats suggested;
};

/// Solves the surplus-constrained LP, preprocesses the optimum, then runs
/// both policies for config.trials replications each, from the same seed
/// (so both face identical arrival streams). Throws std::invalid_argument
/// on an invalid instance or config, std::logic_error if the LP solver
/// fails on this always-feasible problem.
PipelineResult run_pipeline(const Instance& inst,
                            const PipelineConfig& config);

} // namespace stochmatch
