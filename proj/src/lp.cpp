#include "stochmatch/lp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace stochmatch::lp {

namespace {

constexpr double kPivotTol = 1e-9;

void pivot(Eigen::MatrixXd& t, std::vector<int>& basis, int leave, int enter) {
    t.row(leave) /= t(leave, enter);
    for (int r = 0; r < t.rows(); ++r) {
        if (r == leave) continue;
        const double factor = t(r, enter);
        if (factor != 0.0) t.row(r) -= factor * t.row(leave);
    }
    basis[leave] = enter;
}

/// Runs simplex iterations on a tableau whose last column is the rhs and
/// last row the reduced-cost (maximization) objective. Entering column:
/// lowest index with reduced cost below -tol; leaving row: minimum ratio,
/// ties broken by lowest basic-variable index (Bland's rule). Only the
/// first ncols columns may enter. Returns false on an unbounded direction.
bool iterate(Eigen::MatrixXd& t, std::vector<int>& basis, int ncols) {
    const int m = static_cast<int>(basis.size());
    const int rhs_col = static_cast<int>(t.cols()) - 1;
    const long max_steps = 1000 + 200L * (m + ncols);
    for (long step = 0; step < max_steps; ++step) {
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (t(m, j) < -kPivotTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;
        double min_ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < m; ++r) {
            if (t(r, enter) > kPivotTol) {
                min_ratio = std::min(min_ratio, t(r, rhs_col) / t(r, enter));
            }
        }
        if (!std::isfinite(min_ratio)) return false;
        int leave = -1;
        for (int r = 0; r < m; ++r) {
            if (t(r, enter) > kPivotTol) {
                const double ratio = t(r, rhs_col) / t(r, enter);
                if (ratio <= min_ratio + 1e-12 &&
                    (leave < 0 || basis[r] < basis[leave])) {
                    leave = r;
                }
            }
        }
        pivot(t, basis, leave, enter);
    }
    throw std::logic_error("simplex iteration limit exceeded");
}

void check_problem(const LpProblem& p) {
    const std::size_t n = p.variables.size();
    if (p.objective.size() != n) {
        throw std::invalid_argument("objective length does not match "
                                    "variable count");
    }
    for (double c : p.objective) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("non-finite objective coefficient");
        }
    }
    for (const auto& row : p.rows) {
        if (row.coeffs.size() != n) {
            throw std::invalid_argument("row width does not match variable "
                                        "count");
        }
        if (!std::isfinite(row.rhs)) {
            throw std::invalid_argument("non-finite row rhs");
        }
        for (double c : row.coeffs) {
            if (!std::isfinite(c)) {
                throw std::invalid_argument("non-finite row coefficient");
            }
        }
    }
}

} // namespace

std::size_t LpProblem::add_variable(std::string name, double objective_coeff) {
    variables.push_back(std::move(name));
    objective.push_back(objective_coeff);
    for (auto& row : rows) row.coeffs.push_back(0.0);
    return variables.size() - 1;
}

void LpProblem::add_row(
    const std::vector<std::pair<std::size_t, double>>& terms, double rhs) {
    LpRow row;
    row.coeffs.assign(variables.size(), 0.0);
    for (const auto& [col, coeff] : terms) {
        if (col >= variables.size()) {
            throw std::invalid_argument("row references undeclared variable");
        }
        row.coeffs[col] += coeff;
    }
    row.rhs = rhs;
    rows.push_back(std::move(row));
}

LpSolution solve(const LpProblem& problem) {
    check_problem(problem);
    const int n = static_cast<int>(problem.variables.size());
    const int m = static_cast<int>(problem.rows.size());

    // Columns: n structural variables, m slacks, one artificial per row
    // whose rhs is negative (the slack basis is infeasible there), rhs.
    int artificials = 0;
    for (const auto& row : problem.rows) {
        if (row.rhs < 0.0) ++artificials;
    }
    int cols = n + m + artificials + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols);
    std::vector<int> basis(m);
    int next_artificial = n + m;
    for (int r = 0; r < m; ++r) {
        const auto& row = problem.rows[r];
        const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) t(r, j) = sign * row.coeffs[j];
        t(r, n + r) = sign;
        t(r, cols - 1) = sign * row.rhs;
        if (sign < 0.0) {
            t(r, next_artificial) = 1.0;
            basis[r] = next_artificial++;
        } else {
            basis[r] = n + r;
        }
    }

    LpSolution sol;
    if (artificials > 0) {
        // Phase 1: maximize minus the sum of artificials; the reduced-cost
        // row starts at +1 on artificial columns and is then cleared on the
        // basic ones by subtracting their rows.
        for (int c = n + m; c < cols - 1; ++c) t(m, c) = 1.0;
        for (int r = 0; r < m; ++r) {
            if (basis[r] >= n + m) t.row(m) -= t.row(r);
        }
        iterate(t, basis, cols - 1);
        if (t(m, cols - 1) < -1e-7) {
            sol.status = LpStatus::Infeasible;
            return sol;
        }
        // Drive leftover artificials out of the basis; a row where that is
        // impossible is redundant and gets dropped.
        std::vector<bool> keep(m, true);
        for (int r = 0; r < m; ++r) {
            if (basis[r] < n + m) continue;
            int enter = -1;
            for (int j = 0; j < n + m; ++j) {
                if (std::abs(t(r, j)) > kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) {
                pivot(t, basis, r, enter);
            } else {
                keep[r] = false;
            }
        }
        int kept = 0;
        for (int r = 0; r < m; ++r) {
            if (keep[r]) ++kept;
        }
        Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(kept + 1, n + m + 1);
        std::vector<int> reduced_basis(kept);
        int out_row = 0;
        for (int r = 0; r < m; ++r) {
            if (!keep[r]) continue;
            reduced.block(out_row, 0, 1, n + m) = t.block(r, 0, 1, n + m);
            reduced(out_row, n + m) = t(r, cols - 1);
            reduced_basis[out_row] = basis[r];
            ++out_row;
        }
        t.swap(reduced);
        basis.swap(reduced_basis);
        cols = n + m + 1;
    }

    // Phase 2: real objective, expressed as reduced costs against the
    // current basis.
    const int rows_now = static_cast<int>(basis.size());
    for (int j = 0; j < n; ++j) t(rows_now, j) = -problem.objective[j];
    for (int j = n; j < cols; ++j) t(rows_now, j) = 0.0;
    for (int r = 0; r < rows_now; ++r) {
        if (basis[r] < n && problem.objective[basis[r]] != 0.0) {
            t.row(rows_now) += problem.objective[basis[r]] * t.row(r);
        }
    }
    if (!iterate(t, basis, n + m)) {
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.objective = t(rows_now, cols - 1);
    sol.x.assign(n, 0.0);
    for (int r = 0; r < rows_now; ++r) {
        if (basis[r] < n) {
            sol.x[basis[r]] = std::max(t(r, cols - 1), 0.0);
        }
    }
    return sol;
}

namespace {

/// Declares one flow variable per edge in declaration order and adds the
/// two mass-cap families shared by both builders.
void add_flow_core(const Instance& inst, MatchingLp& mlp) {
    LpProblem& p = mlp.problem;
    for (const auto& type : inst.online_types) {
        for (const auto& edge : type.edges) {
            p.add_variable("x(" + type.id + "," + edge.offline + ")",
                           edge.weight);
            mlp.edge_order.emplace_back(type.id, edge.offline);
        }
    }
    std::size_t col = 0;
    for (const auto& type : inst.online_types) {
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t k = 0; k < type.edges.size(); ++k) {
            terms.emplace_back(col + k, 1.0);
        }
        p.add_row(terms, type.rate);
        col += type.edges.size();
    }
    for (const auto& j : inst.offline) {
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t k = 0; k < mlp.edge_order.size(); ++k) {
            if (mlp.edge_order[k].second == j) terms.emplace_back(k, 1.0);
        }
        p.add_row(terms, 1.0);
    }
}

} // namespace

MatchingLp build_basic_matching(const Instance& inst) {
    MatchingLp mlp;
    add_flow_core(inst, mlp);
    return mlp;
}

MatchingLp build_surplus_matching(const Instance& inst) {
    MatchingLp mlp;
    add_flow_core(inst, mlp);
    LpProblem& p = mlp.problem;
    const std::size_t num_edges = mlp.edge_order.size();
    // Auxiliary z_e >= max(2 x_e - rate, 0), encoded as 2 x_e - z_e <= rate
    // together with z_e >= 0; maximization never pushes z above that bound
    // because z only relaxes other rows.
    for (std::size_t k = 0; k < num_edges; ++k) {
        p.add_variable(
            "z(" + mlp.edge_order[k].first + "," + mlp.edge_order[k].second +
                ")",
            0.0);
    }
    std::size_t col = 0;
    for (const auto& type : inst.online_types) {
        for (std::size_t k = 0; k < type.edges.size(); ++k) {
            p.add_row({{col + k, 2.0}, {num_edges + col + k, -1.0}},
                      type.rate);
        }
        col += type.edges.size();
    }
    const double budget = surplus_budget();
    for (const auto& j : inst.offline) {
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t k = 0; k < num_edges; ++k) {
            if (mlp.edge_order[k].second == j) {
                terms.emplace_back(num_edges + k, 1.0);
            }
        }
        p.add_row(terms, budget);
    }
    return mlp;
}

FractionalMatching extract_matching(const MatchingLp& mlp,
                                    const LpSolution& sol) {
    if (sol.status != LpStatus::Optimal) {
        throw std::invalid_argument("cannot extract from a non-optimal "
                                    "solution");
    }
    if (sol.x.size() < mlp.edge_order.size()) {
        throw std::invalid_argument("solution does not cover the flow "
                                    "variables");
    }
    FractionalMatching fm;
    for (std::size_t k = 0; k < mlp.edge_order.size(); ++k) {
        if (sol.x[k] > kTol) {
            fm.x.push_back(
                {mlp.edge_order[k].first, mlp.edge_order[k].second, sol.x[k]});
        }
    }
    return fm;
}

std::string dump(const LpProblem& problem) {
    std::ostringstream out;
    out.precision(17);
    out << "maximize";
    bool first = true;
    for (std::size_t j = 0; j < problem.variables.size(); ++j) {
        const double c = problem.objective[j];
        if (c == 0.0) continue;
        if (first) {
            out << ' ' << c;
            first = false;
        } else {
            out << (c < 0.0 ? " - " : " + ") << std::abs(c);
        }
        out << ' ' << problem.variables[j];
    }
    if (first) out << " 0";
    out << "\nsubject to\n";
    for (const auto& row : problem.rows) {
        out << "  ";
        first = true;
        for (std::size_t j = 0; j < row.coeffs.size(); ++j) {
            const double c = row.coeffs[j];
            if (c == 0.0) continue;
            if (first) {
                out << c;
                first = false;
            } else {
                out << (c < 0.0 ? " - " : " + ") << std::abs(c);
            }
            out << ' ' << problem.variables[j];
        }
        if (first) out << '0';
        out << " <= " << row.rhs << '\n';
    }
    out << "variables >= 0:";
    for (const auto& name : problem.variables) out << ' ' << name;
    out << '\n';
    return out.str();
}

} // namespace stochmatch::lp
