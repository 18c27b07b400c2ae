#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "stochmatch/instance.hpp"

namespace stochmatch::lp {

/// One constraint row: coefficients over all declared variables (dense) and
/// a right-hand side, read as coeffs . x <= rhs.
struct LpRow {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

/// A linear program in the fixed shape used here: maximize objective . x
/// subject to rows of <= constraints and x >= 0.
struct LpProblem {
    std::vector<std::string> variables;
    std::vector<double> objective;
    std::vector<LpRow> rows;

    /// Declares a new variable and returns its column index.
    std::size_t add_variable(std::string name, double objective_coeff);

    /// Appends a row given as sparse (column, coefficient) terms.
    void add_row(const std::vector<std::pair<std::size_t, double>>& terms,
                 double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x; ///< one value per declared variable when Optimal
};

/// Solves the program with a dense-tableau two-phase simplex. Pivoting uses
/// Bland's anti-cycling rule and a 1e-9 pivot tolerance, so the result is
/// deterministic for identical input. Unbounded and infeasible programs are
/// reported via the status. Throws std::invalid_argument on a malformed
/// problem (row width mismatch, non-finite data).
LpSolution solve(const LpProblem& problem);

/// A program built from an instance, remembering which leading columns are
/// the per-edge flow variables and which edge each one stands for.
struct MatchingLp {
    LpProblem problem;
    std::vector<std::pair<std::string, std::string>> edge_order;
};

/// The matching LP with the per-offline surplus cap: variables x_e and
/// auxiliaries z_e per edge; rows cap online mass by the rate, offline mass
/// by 1, bound z_e >= 2 x_e - rate via 2 x_e - z_e <= rate, and cap the
/// per-offline sum of z by 1 - ln 2. Objective: total weighted flow.
MatchingLp build_surplus_matching(const Instance& inst);

/// The plain matching LP: the same flow variables and mass caps, without
/// auxiliaries or surplus rows. Its optimum bounds the offline optimum in
/// expectation.
MatchingLp build_basic_matching(const Instance& inst);

/// Reads the flow variables of a solution back into a fractional matching,
/// in edge order, dropping entries at or below the global tolerance.
/// Auxiliary variables are not part of the result.
FractionalMatching extract_matching(const MatchingLp& mlp,
                                    const LpSolution& sol);

/// Human-readable listing of a program (variables, objective, rows) for
/// debugging.
std::string dump(const LpProblem& problem);

} // namespace stochmatch::lp
