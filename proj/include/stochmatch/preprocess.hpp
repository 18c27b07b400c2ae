#pragma once

#include "stochmatch/instance.hpp"

namespace stochmatch {

/// Instance/matching pair produced by a padding step.
struct PaddedResult {
    Instance inst;
    FractionalMatching fm;
};

/// For every online type whose outgoing flow falls short of its rate, adds
/// m = max(ceil(rate - flow), 2) zero-weight dummy offline vertices, each
/// receiving an equal share of the deficit. Afterwards every type's flow
/// equals its rate. Because m >= 2, each dummy's incoming flow is at most
/// half the type's rate, so the dummies never contribute to the surplus
/// constraint. Total weight is unchanged. The ceiling tolerates values up
/// to 1e-9 below an integer.
PaddedResult pad_online(const Instance& inst, const FractionalMatching& fm);

/// Adds two dummy offline vertices plus a single zero-weight dummy online
/// type sending flow 1 - x_j to every offline vertex j that is not yet
/// saturated (the two new ones receive flow 1 each). The dummy type's rate
/// equals its total flow, which is at least 2, so its per-edge flow never
/// exceeds half its rate and the surplus constraint is untouched.
/// Afterwards every offline vertex is saturated. Requires types already
/// saturated (pad_online output).
PaddedResult pad_offline(const Instance& inst, const FractionalMatching& fm);

/// Result of splitting types into the two admissible shapes.
struct SplitResult {
    Instance inst;
    FractionalMatching fm;
    SplitMap split;
};

/// Splits every online type into children that each have either a single
/// full-rate edge or two half-rate edges, preserving all per-edge flow.
///
/// Construction per type of rate r: lay its edges as consecutive
/// subintervals of [0, r) with lengths x_ij, pair each position p in
/// [0, r/2) with p + r/2, and cut [0, r/2) at every boundary of either
/// half. A maximal piece [l, u) becomes a child of rate 2(u - l) with flow
/// u - l to the edge under l and to the edge under l + r/2 — collapsed to
/// one edge of flow 2(u - l) when the two coincide, which happens exactly
/// where an edge overlaps its own shifted copy, i.e. where x_ij exceeds
/// r/2. Types already in an admissible shape pass through unchanged and do
/// not appear in the SplitMap. Boundaries closer than 1e-12 are merged and
/// children of rate below 1e-12 dropped.
///
/// Requires every type's outgoing flow to equal its rate; throws
/// std::invalid_argument otherwise.
SplitResult split_types(const Instance& inst, const FractionalMatching& fm);

/// Full preprocessing output: the classified instance and the record of
/// how original types were split.
struct PreprocessResult {
    PreprocessedInstance pinst;
    SplitMap split;
};

/// Runs pad_online, pad_offline, split_types and classification in
/// sequence. The input matching must pass validate_matching (including the
/// surplus constraint) and 0 <= t0 <= t1 <= 1 must hold; throws
/// std::invalid_argument otherwise. The output satisfies every
/// PreprocessedInstance invariant — types and offline vertices saturated,
/// every edge first or second class, first-class inflow within the
/// 1 - ln 2 budget — and preserves total weight.
PreprocessResult preprocess(const Instance& inst, const FractionalMatching& fm,
                            double t0, double t1);

} // namespace stochmatch
