#pragma once

#include <vector>

#include "stochmatch/instance.hpp"

namespace stochmatch::bounds {

/// Probability that an offline vertex with first-class inflow y is still
/// unmatched at time t under the staged policy with boundaries (t0, t1):
/// exp(-y t) up to t0, then decaying at unit rate up to t1, then at rate
/// 2 - y. Exact for t <= t1, a lower bound beyond; continuous at both
/// boundaries. Throws std::invalid_argument outside the domain
/// 0 <= y <= 1 - ln 2, 0 <= t <= 1, 0 <= t0 <= t1 <= 1.
double survival_bound(double y, double t, double t0, double t1);

/// Guaranteed matched-probability-to-flow ratio of a first-class edge into
/// a vertex with first-class inflow y: the integral of survival_bound over
/// [0, 1]. The removable singularity of the first term at y = 0 is routed
/// to its limit t0 when y < 1e-12.
double ratio_first(double y, double t0, double t1);

/// Guaranteed ratio of a second-class edge into a vertex with first-class
/// inflow y: the survival integral over (t0, t1] plus the late stage
/// weighted by 2 - exp(-(t1 - t0)), which accounts for the snapshot rule
/// favoring a lone unmatched neighbor.
double ratio_second(double y, double t0, double t1);

/// Both ratio curves evaluated on a uniform y-grid over [0, 1 - ln 2].
struct RatioCurve {
    double t0 = 0.0;
    double t1 = 1.0;
    std::vector<double> y;
    std::vector<double> r1;
    std::vector<double> r2;
    double r1_min = 0.0;
    double r2_min = 0.0;
    double r1_argmin = 0.0;
    double r2_argmin = 0.0;
    bool r1_nonincreasing = false; ///< within 1e-12 slack per grid step
    bool r2_nonincreasing = false;

    /// The guaranteed ratio: worst case over both curves.
    double min_value() const { return std::min(r1_min, r2_min); }
};

/// Evaluates ratio_first and ratio_second on grid_size points (>= 2) and
/// records minima, arg-minima and monotonicity flags.
RatioCurve min_ratio(double t0, double t1, int grid_size);

/// Numeric certificate for the monotonicity of both ratio curves at the
/// operating point (t0, t1) = (1/20, 3/4), checked on a uniform x-grid
/// over [0, 1 - ln 2]:
///  - the curves themselves are nonincreasing (1e-12 slack per step);
///  - the sufficient pointwise inequality
///    (2 - x)(e^{7/10} - 1) >
///    20 (2 - e^{-7/10}) ((1 - e^{-(2-x)/4})(1/(2-x) - 1/20)
///                        - (1/4) e^{-(2-x)/4})
///    holds strictly, its left side reaching its minimum (about 1.716) at
///    x = 1 - ln 2 while the right side stays below closed-form caps of
///    about 1.256 on the lower half of the range and about 1.272 on the
///    upper half. Each cap takes the right side's decreasing factor at the
///    subrange's left end and its increasing factor at the right end.
struct MonotonicityReport {
    int grid_size = 0;
    double lhs_min = 0.0;
    double lhs_argmin = 0.0;
    double rhs_low_bound = 0.0;  ///< closed-form cap on [0, (1-ln2)/2]
    double rhs_high_bound = 0.0; ///< closed-form cap on [(1-ln2)/2, 1-ln2]
    double min_gap = 0.0;        ///< min of lhs - rhs over the grid
    bool sum_nonincreasing = false;  ///< ratio_first curve
    bool tail_nonincreasing = false; ///< ratio_second curve
    bool pointwise = false;          ///< strict inequality at every point
    bool bounded = false; ///< right side never exceeds the applicable cap

    bool pass() const {
        return sum_nonincreasing && tail_nonincreasing && pointwise &&
               bounded;
    }
};

MonotonicityReport monotonicity_check(int grid_size);

/// Best stage boundaries found on a step grid over the given ranges.
struct ParamSearchResult {
    double t0 = 0.0;
    double t1 = 0.0;
    double ratio = 0.0;
    long cells = 0; ///< (t0, t1) pairs evaluated
};

/// Maximizes min_ratio(t0, t1, grid_size).min_value() over the product
/// grid {t0_lo, t0_lo + step, ...} x {t1_lo, ...}, skipping pairs with
/// t0 > t1. Ties resolve toward smaller t0, then smaller t1. Throws
/// std::invalid_argument on malformed ranges or an empty grid.
ParamSearchResult search_params(double t0_lo, double t0_hi, double t1_lo,
                                double t1_hi, double step,
                                int grid_size = 2001);

/// Worst-case witness: two offline vertices j0/j1 (edge weights w1/w2),
/// each fed by one first-class type of rate 1 - ln 2 and sharing one
/// second-class type of rate 2 ln 2. Every vertex is saturated and the
/// surplus constraint is tight, so the first-class inflow sits exactly at
/// the budget where the guaranteed ratio is worst.
struct Gadget {
    Instance inst;
    FractionalMatching fm;
};

Gadget make_gadget(double w1, double w2);

} // namespace stochmatch::bounds
