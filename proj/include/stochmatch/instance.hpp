#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stochmatch {

/// Tolerance used for feasibility and equality checks throughout.
inline constexpr double kTol = 1e-9;

/// Budget 1 - ln 2 of the per-offline surplus constraint
/// sum_i max(2 x_ij - rate_i, 0) <= surplus_budget().
inline double surplus_budget() { return 1.0 - std::log(2.0); }

/// Reserved id prefix for vertices and types created by the padding steps.
/// They take part in matching dynamics but carry zero weight.
inline constexpr const char* kDummyPrefix = "~dummy/";

bool is_dummy_id(const std::string& id);

/// One admissible edge of an online type: the offline vertex it may be
/// matched to and the reward collected when that happens.
struct Edge {
    std::string offline;
    double weight = 0.0;
};

/// An online vertex type: arrivals of this type form a Poisson process with
/// the given rate over the unit time horizon, and every arrival shares the
/// same edge set.
struct OnlineType {
    std::string id;
    double rate = 0.0;
    std::vector<Edge> edges;
};

/// A bipartite instance: online types on one side, offline vertices on the
/// other. Offline vertices can each be matched at most once; online arrivals
/// must be matched (or dropped) on arrival.
struct Instance {
    std::vector<OnlineType> online_types;
    std::vector<std::string> offline;

    /// Sum of all arrival rates.
    double total_rate() const;

    /// Index of an online type by id, or npos if absent.
    std::size_t online_index(const std::string& id) const;

    /// Index of an offline vertex by id, or npos if absent.
    std::size_t offline_index(const std::string& id) const;

    /// Weight of the edge (i, j), or 0 if the edge does not exist.
    double edge_weight(const std::string& i, const std::string& j) const;

    bool has_edge(const std::string& i, const std::string& j) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// One entry of a fractional matching: flow assigned to edge (i, j).
struct FlowEntry {
    std::string i;
    std::string j;
    double flow = 0.0;
};

/// A fractional assignment of flow to edges. Entries have distinct (i, j)
/// keys; order is preserved for serialization.
struct FractionalMatching {
    std::vector<FlowEntry> x;

    /// Flow on edge (i, j), or 0 if no entry exists.
    double flow(const std::string& i, const std::string& j) const;

    /// Total flow leaving online type i.
    double online_mass(const std::string& i) const;

    /// Total flow entering offline vertex j.
    double offline_mass(const std::string& j) const;

    /// Sum over edges of weight times flow.
    double objective(const Instance& inst) const;
};

/// Outcome of a validation pass: a list of human-readable problems, empty
/// when the object checks out.
struct ValidationReport {
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
    void fail(std::string message) { errors.push_back(std::move(message)); }

    /// All errors joined with newlines (empty string when ok).
    std::string to_string() const;
};

/// Structural checks on an instance: nonempty ids, no duplicate ids, rates
/// >= 0, weights >= 0, every edge endpoint present, no duplicate edges
/// within a type.
ValidationReport validate_instance(const Instance& inst);

/// Capacity checks on a fractional matching: every entry lies on an
/// existing edge, no duplicate entries, flows >= -tol, online mass
/// <= rate + tol per type, offline mass <= 1 + tol per vertex. This is the
/// feasibility level the plain matching LP and the one-shot baseline
/// policy require.
ValidationReport validate_matching_basic(const Instance& inst,
                                         const FractionalMatching& fm);

/// Full feasibility: the capacity checks plus the per-offline surplus
/// constraint sum_i max(2 x_ij - rate_i, 0) <= 1 - ln 2 + tol.
ValidationReport validate_matching(const Instance& inst,
                                   const FractionalMatching& fm);

/// One child produced when an online type is split: the child's id and the
/// share of the parent's rate it receives. An arrival of the parent type
/// can be relabeled as the child with probability rate / parent rate.
struct SplitChild {
    std::string child;
    double rate = 0.0;
};

/// For each original online type id, the children it was split into.
/// Children rates sum to the parent rate; a parent absent from the map was
/// passed through unchanged.
using SplitMap = std::map<std::string, std::vector<SplitChild>>;

enum class EdgeClass {
    First,  ///< carries the type's whole rate: x_ij = rate_i
    Second, ///< carries exactly half of it: x_ij = rate_i / 2
};

/// An edge together with its class, as consumed by the staged policy.
struct ClassifiedEdge {
    std::string i;
    std::string j;
    double weight = 0.0;
    double flow = 0.0;
    EdgeClass cls = EdgeClass::First;
};

/// An instance whose fractional matching saturates every type with either
/// one full-rate edge (first class) or two half-rate edges (second class),
/// plus the stage boundaries the staged policy should use. This is the only
/// form that policy accepts.
struct PreprocessedInstance {
    Instance inst;
    FractionalMatching matching;
    std::vector<ClassifiedEdge> edges;
    std::map<std::string, double> y; ///< per offline, first-class inflow
    double t0 = 0.0;
    double t1 = 1.0;

    bool offline_is_dummy(const std::string& j) const {
        return is_dummy_id(j);
    }
    bool type_is_dummy(const std::string& i) const { return is_dummy_id(i); }
};

/// Labels each positive-flow edge First (x_ij = rate_i) or Second
/// (x_ij = rate_i / 2) and tabulates the first-class inflow y_j. Requires
/// 0 <= t0 <= t1 <= 1 and a matching passing validate_matching_basic whose
/// every positive-rate type has exactly one of the two admissible shapes;
/// throws std::invalid_argument otherwise. Offline saturation and the
/// y_j <= 1 - ln 2 budget are established by the preprocessing pipeline,
/// not checked here.
PreprocessedInstance classify(const Instance& inst,
                              const FractionalMatching& fm, double t0,
                              double t1);

} // namespace stochmatch
