#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ramcp {

/// Simplex exceeded its pivot budget or produced a point violating its own constraints.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * maximize c·x  subject to  A x = b,  G x >= h,  x >= 0.
 * Rows are stored sparsely as (variable, coefficient) lists.
 */
struct LpProblem {
    struct Row {
        std::vector<std::pair<std::size_t, double>> coeffs;
        double rhs = 0.0;
    };

    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Row> equalities;
    std::vector<Row> at_least;

    explicit LpProblem(std::size_t n = 0) : num_vars(n), objective(n, 0.0) {}

    std::size_t add_var(double cost = 0.0) {
        objective.push_back(cost);
        return num_vars++;
    }
    void add_equality(Row r) { equalities.push_back(std::move(r)); }
    void add_at_least(Row r) { at_least.push_back(std::move(r)); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;  // populated when Optimal
    double objective = 0.0;
};

inline constexpr double kLpFeasibilityTol = 1e-7;  // accepted constraint violation of a returned solution
inline constexpr double kLpPhase1Tol = 1e-9;        // residual artificial mass still counted as feasible
inline constexpr double kLpPivotTol = 1e-10;

/// Two-phase dense primal simplex. Deterministic for identical input.
LpOutcome solve(const LpProblem& problem);

std::string to_string(LpStatus s);

/// Human-readable dump of the problem and, if given, the outcome.
std::string dump_lp(const LpProblem& problem, const LpOutcome* outcome = nullptr);

}  // namespace ramcp
