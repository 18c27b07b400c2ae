#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stochmatch/instance.hpp"

namespace stochmatch {

/// One realized online arrival.
struct Arrival {
    double t = 0.0;
    std::string type;
};

/// A realized arrival stream over [0, 1], tagged with the generator
/// coordinates that produced it so any replication can be regenerated.
struct ArrivalSequence {
    std::vector<Arrival> arrivals; ///< times strictly increasing
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
};

/// Samples the superposed Poisson process of all types: exponential gaps at
/// the total rate until time 1 is passed, each event's type drawn in
/// proportion to its rate. Deterministic in (seed, replication); a total
/// rate of 0 yields an empty sequence.
ArrivalSequence sample_arrivals(const Instance& inst, std::uint64_t seed,
                                std::uint64_t replication);

/// Rewrites arrivals of split parent types to child types, each child
/// drawn with probability child rate / parent rate. Arrivals of types not
/// in the map pass through. This reproduces, in distribution, sampling the
/// split instance directly and serves as a cross-check of the split step.
ArrivalSequence relabel_arrivals(const ArrivalSequence& arr,
                                 const SplitMap& split, std::uint64_t seed);

/// One realized match: which arrival took which offline vertex, and when.
struct MatchedPair {
    std::size_t arrival = 0;
    std::string offline;
    double time = 0.0;
};

/// Outcome of one policy run: every offline vertex is matched at most
/// once, every arrival at most once, and matched pairs are instance edges.
struct MatchResult {
    std::vector<MatchedPair> pairs;
    std::map<std::string, double> match_time; ///< per offline; +inf if never
    double weight = 0.0;
};

/// Runs the staged policy on one arrival stream. A first-class arrival
/// takes its sole neighbor when unmatched. A second-class arrival is
/// discarded up to and including t0; on (t0, t1] a fair coin picks one of
/// its two neighbors and only that one is attempted; after t1 a snapshot
/// of offline statuses frozen at t1 is consulted — if it shows exactly one
/// neighbor unmatched, that neighbor is attempted, otherwise the coin rule
/// applies. Policy coins are deterministic in (seed, arr.replication).
MatchResult run_multistage(const PreprocessedInstance& pinst,
                           const ArrivalSequence& arr, std::uint64_t seed);

/// Runs the one-shot baseline: an arrival of type i attempts neighbor j
/// with probability x_ij / rate_i (edges in declaration order) and is
/// discarded with the leftover probability. The matching must pass
/// validate_matching_basic.
MatchResult run_suggested(const Instance& inst, const FractionalMatching& fm,
                          const ArrivalSequence& arr, std::uint64_t seed);

/// Maximum-weight matching between the realized arrivals and the offline
/// vertices, by shortest augmenting paths with potentials; exact.
double offline_optimum(const Instance& inst, const ArrivalSequence& arr);

enum class Policy { Multistage, Suggested };

struct MonteCarloOptions {
    bool with_opt = false; ///< also average the per-realization optimum
    int threads = 0;       ///< worker threads; 0 picks the hardware count
};

/// Per-edge aggregate over all replications.
struct EdgeStat {
    std::string i;
    std::string j;
    EdgeClass cls = EdgeClass::First;
    double x = 0.0;          ///< flow carried by the edge
    long long matched = 0;   ///< replications in which the edge matched
    double ratio = 0.0;      ///< matched / (trials * x)
    double std_error = 0.0;  ///< binomial standard error of the ratio
    double bound = 0.0;      ///< analytic guaranteed ratio for this edge
};

/// Empirical survival of one offline vertex: value[k] estimates the
/// probability of being unmatched at grid[k].
struct SurvivalCurve {
    std::string j;
    std::vector<double> value;
};

/// Survival of vertex j restricted to replications where its second-class
/// partner `given` was (k = 1) or was not (k = 0) still unmatched at t1.
/// Counts are kept raw so consumers can form exact conditional rates.
struct ConditionalCurve {
    std::string j;
    std::string given;
    int unmatched_at_t1 = 0;          ///< the conditioning value k
    long long base = 0;               ///< replications meeting the condition
    std::vector<long long> survivors; ///< of j at each grid time, among base
};

struct RunStats {
    Policy policy = Policy::Multistage;
    long long trials = 0;
    double t0 = 0.0;
    double t1 = 1.0;
    std::vector<double> grid;
    std::vector<EdgeStat> edges;
    std::vector<SurvivalCurve> survival;       ///< offline declaration order
    std::vector<ConditionalCurve> conditional; ///< per second-class pair
    double mean_weight = 0.0;
    double weight_std_error = 0.0;
    bool has_opt = false;
    double mean_opt = 0.0;
    double opt_std_error = 0.0;
};

/// Runs `trials` independent replications of the chosen policy and
/// aggregates per-edge counts, survival curves on the given time grid
/// (sorted, within [0, 1]), conditional curves for second-class neighbor
/// pairs, and the mean achieved weight. Replications are split across
/// worker threads in contiguous chunks; counts merge as integers and the
/// per-replication weights are summed in replication order, so the result
/// is bit-identical for any thread count. Replication r always uses
/// generator coordinates (seed, r).
RunStats monte_carlo(const PreprocessedInstance& pinst, Policy policy,
                     long long trials, std::uint64_t seed,
                     const std::vector<double>& grid,
                     const MonteCarloOptions& options = {});

/// Uniform time grid of `points` >= 2 values from 0 to 1 inclusive.
std::vector<double> uniform_grid(int points);

/// Fixed-schema CSV: edge_i, edge_j, class, x_ij, matched_count, ratio,
/// stderr — one row per edge.
std::string stats_to_csv(const RunStats& stats);

/// Full report as JSON: the CSV fields plus per-edge analytic bounds,
/// survival and conditional curves, and the mean weight (and mean optimum
/// when present). Field order is fixed.
std::string stats_to_json(const RunStats& stats);

} // namespace stochmatch
