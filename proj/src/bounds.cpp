#include "stochmatch/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace stochmatch::bounds {

namespace {

constexpr double kDomainTol = 1e-12;

/// Threshold below which the first ratio_first term switches to its y -> 0
/// limit t0 (removable singularity).
constexpr double kTinyY = 1e-12;

void check_domain(double y, double t0, double t1) {
    if (!(y >= -kDomainTol && y <= surplus_budget() + kDomainTol)) {
        throw std::invalid_argument("need 0 <= y <= 1 - ln 2");
    }
    if (!(0.0 <= t0 && t0 <= t1 && t1 <= 1.0)) {
        throw std::invalid_argument("need 0 <= t0 <= t1 <= 1");
    }
}

} // namespace

double survival_bound(double y, double t, double t0, double t1) {
    check_domain(y, t0, t1);
    if (!(0.0 <= t && t <= 1.0)) {
        throw std::invalid_argument("need 0 <= t <= 1");
    }
    if (t <= t0) return std::exp(-y * t);
    if (t <= t1) return std::exp(-y * t0 - (t - t0));
    return std::exp(-y * t0 - (t1 - t0) - (2.0 - y) * (t - t1));
}

double ratio_first(double y, double t0, double t1) {
    check_domain(y, t0, t1);
    const double early =
        y < kTinyY ? t0 : (1.0 - std::exp(-y * t0)) / y;
    const double mid = std::exp(-y * t0) * (1.0 - std::exp(-(t1 - t0)));
    const double late = std::exp(-y * t0 - (t1 - t0)) *
                        (1.0 - std::exp(-(2.0 - y) * (1.0 - t1))) /
                        (2.0 - y);
    return early + mid + late;
}

double ratio_second(double y, double t0, double t1) {
    check_domain(y, t0, t1);
    const double mid = std::exp(-y * t0) * (1.0 - std::exp(-(t1 - t0)));
    const double late = std::exp(-y * t0 - (t1 - t0)) *
                        (1.0 - std::exp(-(2.0 - y) * (1.0 - t1))) /
                        (2.0 - y);
    return mid + (2.0 - std::exp(-(t1 - t0))) * late;
}

RatioCurve min_ratio(double t0, double t1, int grid_size) {
    check_domain(0.0, t0, t1);
    if (grid_size < 2) throw std::invalid_argument("need grid_size >= 2");
    const double budget = surplus_budget();
    RatioCurve curve;
    curve.t0 = t0;
    curve.t1 = t1;
    curve.y.reserve(grid_size);
    curve.r1.reserve(grid_size);
    curve.r2.reserve(grid_size);
    curve.r1_nonincreasing = true;
    curve.r2_nonincreasing = true;
    for (int k = 0; k < grid_size; ++k) {
        const double y = budget * k / (grid_size - 1);
        const double r1 = ratio_first(y, t0, t1);
        const double r2 = ratio_second(y, t0, t1);
        if (k == 0) {
            curve.r1_min = r1;
            curve.r2_min = r2;
            curve.r1_argmin = y;
            curve.r2_argmin = y;
        } else {
            if (r1 > curve.r1.back() + 1e-12) curve.r1_nonincreasing = false;
            if (r2 > curve.r2.back() + 1e-12) curve.r2_nonincreasing = false;
            if (r1 < curve.r1_min) {
                curve.r1_min = r1;
                curve.r1_argmin = y;
            }
            if (r2 < curve.r2_min) {
                curve.r2_min = r2;
                curve.r2_argmin = y;
            }
        }
        curve.y.push_back(y);
        curve.r1.push_back(r1);
        curve.r2.push_back(r2);
    }
    return curve;
}

namespace {

double certificate_lhs(double x) {
    return (2.0 - x) * (std::exp(7.0 / 10.0) - 1.0);
}

double certificate_rhs(double x) {
    const double q = (2.0 - x) / 4.0;
    return 20.0 * (2.0 - std::exp(-7.0 / 10.0)) *
           ((1.0 - std::exp(-q)) * (1.0 / (2.0 - x) - 1.0 / 20.0) -
            std::exp(-q) / 4.0);
}

} // namespace

MonotonicityReport monotonicity_check(int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("need grid_size >= 2");
    const double budget = surplus_budget();
    const double split = budget / 2.0;

    MonotonicityReport report;
    report.grid_size = grid_size;
    report.sum_nonincreasing = true;
    report.tail_nonincreasing = true;
    report.pointwise = true;
    report.bounded = true;

    // Closed-form cap for the right side over [lo, hi]: its decreasing
    // factor 1 - e^{-(2-x)/4} and its subtracted increasing term are
    // frozen at lo, the increasing coefficient 1/(2-x) - 1/20 at hi.
    const double scale = 20.0 * (2.0 - std::exp(-7.0 / 10.0));
    const auto rhs_cap = [scale](double lo, double hi) {
        const double decay = std::exp(-(2.0 - lo) / 4.0);
        return scale *
               ((1.0 - decay) * (1.0 / (2.0 - hi) - 1.0 / 20.0) - decay / 4.0);
    };
    report.rhs_low_bound = rhs_cap(0.0, split);
    report.rhs_high_bound = rhs_cap(split, budget);

    double prev_sum = 0.0;
    double prev_tail = 0.0;
    bool have_gap = false;
    for (int k = 0; k < grid_size; ++k) {
        const double x = budget * k / (grid_size - 1);
        const double sum = ratio_first(x, 1.0 / 20.0, 3.0 / 4.0);
        const double tail = ratio_second(x, 1.0 / 20.0, 3.0 / 4.0);
        if (k > 0) {
            if (sum > prev_sum + 1e-12) report.sum_nonincreasing = false;
            if (tail > prev_tail + 1e-12) report.tail_nonincreasing = false;
        }
        prev_sum = sum;
        prev_tail = tail;

        const double lhs = certificate_lhs(x);
        const double rhs = certificate_rhs(x);
        if (!(lhs > rhs)) report.pointwise = false;
        if (!have_gap || lhs - rhs < report.min_gap) {
            report.min_gap = lhs - rhs;
            have_gap = true;
        }
        if (k == 0 || lhs < report.lhs_min) {
            report.lhs_min = lhs;
            report.lhs_argmin = x;
        }
        if (x <= split + kDomainTol && rhs > report.rhs_low_bound + 1e-12) {
            report.bounded = false;
        }
        if (x >= split - kDomainTol && rhs > report.rhs_high_bound + 1e-12) {
            report.bounded = false;
        }
    }
    // The half-way point need not be a grid point but closes both
    // subranges; the full-range endpoints always are grid points.
    const double rhs_mid = certificate_rhs(split);
    if (rhs_mid > report.rhs_low_bound + 1e-12 ||
        rhs_mid > report.rhs_high_bound + 1e-12) {
        report.bounded = false;
    }
    return report;
}

ParamSearchResult search_params(double t0_lo, double t0_hi, double t1_lo,
                                double t1_hi, double step, int grid_size) {
    if (!(0.0 <= t0_lo && t0_lo <= t0_hi && t0_hi <= 1.0) ||
        !(0.0 <= t1_lo && t1_lo <= t1_hi && t1_hi <= 1.0)) {
        throw std::invalid_argument("ranges must lie within [0, 1]");
    }
    if (!(step > 0.0)) throw std::invalid_argument("need step > 0");
    const long n0 =
        static_cast<long>(std::floor((t0_hi - t0_lo) / step + 1e-9)) + 1;
    const long n1 =
        static_cast<long>(std::floor((t1_hi - t1_lo) / step + 1e-9)) + 1;

    ParamSearchResult best;
    bool found = false;
    for (long a = 0; a < n0; ++a) {
        const double t0 = t0_lo + step * static_cast<double>(a);
        for (long b = 0; b < n1; ++b) {
            const double t1 = t1_lo + step * static_cast<double>(b);
            if (t0 > t1 + kDomainTol) continue;
            const double ratio =
                min_ratio(std::min(t0, t1), t1, grid_size).min_value();
            ++best.cells;
            if (!found || ratio > best.ratio) {
                best.t0 = t0;
                best.t1 = t1;
                best.ratio = ratio;
                found = true;
            }
        }
    }
    if (!found) throw std::invalid_argument("empty parameter grid");
    return best;
}

Gadget make_gadget(double w1, double w2) {
    if (!(w1 >= 0.0) || !(w2 >= 0.0)) {
        throw std::invalid_argument("weights must be nonnegative");
    }
    const double budget = surplus_budget(); // 1 - ln 2
    const double ln2 = std::log(2.0);
    Gadget g;
    g.inst.offline = {"j0", "j1"};
    g.inst.online_types.push_back({"f0", budget, {{"j0", w1}}});
    g.inst.online_types.push_back({"f1", budget, {{"j1", w2}}});
    g.inst.online_types.push_back(
        {"s", 2.0 * ln2, {{"j0", w1}, {"j1", w2}}});
    g.fm.x.push_back({"f0", "j0", budget});
    g.fm.x.push_back({"f1", "j1", budget});
    g.fm.x.push_back({"s", "j0", ln2});
    g.fm.x.push_back({"s", "j1", ln2});
    return g;
}

} // namespace stochmatch::bounds
