#include "ramcp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ramcp {

namespace {

class Tableau {
public:
    Tableau(const LpProblem& p) : n_(p.num_vars) {
        const std::size_t eq = p.equalities.size();
        const std::size_t ge = p.at_least.size();
        m_ = eq + ge;
        surplus0_ = n_;
        art0_ = n_ + ge;
        cols_ = art0_ + m_;
        width_ = cols_ + 1;
        t_.assign(m_ * width_, 0.0);
        basis_.resize(m_);
        active_.assign(m_, true);

        auto load = [&](std::size_t r, const LpProblem::Row& row) {
            for (const auto& [j, v] : row.coeffs) {
                if (j >= n_) throw std::invalid_argument("LP row references variable out of range");
                at(r, j) += v;
            }
            rhs(r) = row.rhs;
        };
        for (std::size_t i = 0; i < eq; ++i) load(i, p.equalities[i]);
        for (std::size_t i = 0; i < ge; ++i) {
            load(eq + i, p.at_least[i]);
            at(eq + i, surplus0_ + i) = -1.0;
        }
        for (std::size_t r = 0; r < m_; ++r) {
            if (rhs(r) < 0.0) {
                for (std::size_t j = 0; j < width_; ++j) at(r, j) = -at(r, j);
            }
            at(r, art0_ + r) = 1.0;
            basis_[r] = art0_ + r;
        }
        cost_.assign(width_, 0.0);
        pivot_cap_ = 50 * (m_ + cols_) + 1000;
        bland_after_ = 2 * (m_ + cols_);
    }

    LpOutcome run(const LpProblem& p) {
        // phase 1: maximize -sum(artificials)
        std::vector<double> c1(cols_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) c1[art0_ + r] = -1.0;
        price(c1);
        if (iterate(cols_) == Step::Unbounded)
            throw NumericalFailure("phase-1 simplex reported unbounded");
        const double infeas = -cost_[cols_];
        double scale = 1.0;
        for (std::size_t r = 0; r < m_; ++r) scale = std::max(scale, std::abs(rhs(r)));
        if (infeas > kLpPhase1Tol * scale) return {LpStatus::Infeasible, {}, 0.0};

        drive_out_artificials();

        // phase 2 over original and surplus columns only
        std::vector<double> c2(cols_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) c2[j] = p.objective[j];
        price(c2);
        if (iterate(art0_) == Step::Unbounded) return {LpStatus::Unbounded, {}, 0.0};

        LpOutcome out;
        out.status = LpStatus::Optimal;
        out.x.assign(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            if (active_[r] && basis_[r] < n_) out.x[basis_[r]] = std::max(0.0, rhs(r));
        }
        out.objective = 0.0;
        for (std::size_t j = 0; j < n_; ++j) out.objective += p.objective[j] * out.x[j];
        return out;
    }

private:
    enum class Step { Optimal, Unbounded };

    double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
    double& rhs(std::size_t r) { return t_[r * width_ + cols_]; }

    // cost_[j] = c_B B^-1 A_j - c_j ; cost_[cols_] = objective value
    void price(const std::vector<double>& c) {
        for (std::size_t j = 0; j < cols_; ++j) cost_[j] = -c[j];
        cost_[cols_] = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (!active_[r]) continue;
            const double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            const double* row = &t_[r * width_];
            for (std::size_t j = 0; j < width_; ++j) cost_[j] += cb * row[j];
        }
    }

    void pivot(std::size_t r, std::size_t e) {
        double* prow = &t_[r * width_];
        const double inv = 1.0 / prow[e];
        for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
        prow[e] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r || !active_[i]) continue;
            double* row = &t_[i * width_];
            const double f = row[e];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
            row[e] = 0.0;
        }
        const double f = cost_[e];
        if (f != 0.0) {
            for (std::size_t j = 0; j < width_; ++j) cost_[j] -= f * prow[j];
            cost_[e] = 0.0;
        }
        basis_[r] = e;
        ++pivots_;
        if (pivots_ > pivot_cap_) throw NumericalFailure("simplex pivot budget exhausted");
    }

    // Columns >= limit are never entered.
    Step iterate(std::size_t limit) {
        const double dtol = 1e-9;
        while (true) {
            const bool bland = pivots_ >= bland_after_;
            std::size_t enter = npos_;
            double best = -dtol;
            for (std::size_t j = 0; j < limit; ++j) {
                if (cost_[j] < best) {
                    enter = j;
                    if (bland) break;
                    best = cost_[j];
                }
            }
            if (enter == npos_) return Step::Optimal;

            std::size_t leave = npos_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                if (!active_[r]) continue;
                const double a = at(r, enter);
                if (a <= kLpPivotTol) continue;
                const double q = std::max(0.0, rhs(r)) / a;
                if (leave == npos_ || q < ratio - 1e-12) {
                    ratio = q;
                    leave = r;
                } else if (q <= ratio + 1e-12 && basis_[r] < basis_[leave]) {
                    ratio = std::min(ratio, q);
                    leave = r;
                }
            }
            if (leave == npos_) return Step::Unbounded;
            pivot(leave, enter);
        }
    }

    void drive_out_artificials() {
        for (std::size_t r = 0; r < m_; ++r) {
            if (!active_[r] || basis_[r] < art0_) continue;
            std::size_t col = npos_;
            double best = kLpPivotTol;
            for (std::size_t j = 0; j < art0_; ++j) {
                const double a = std::abs(at(r, j));
                if (a > best) {
                    best = a;
                    col = j;
                }
            }
            if (col == npos_) {
                active_[r] = false;  // redundant row
            } else {
                pivot(r, col);
            }
        }
    }

    static constexpr std::size_t npos_ = std::numeric_limits<std::size_t>::max();

    std::size_t n_, m_ = 0, surplus0_ = 0, art0_ = 0, cols_ = 0, width_ = 0;
    std::vector<double> t_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
    std::size_t pivots_ = 0, pivot_cap_ = 0, bland_after_ = 0;
};

void verify(const LpProblem& p, const LpOutcome& out) {
    auto check = [&](const LpProblem::Row& row, bool equality) {
        double lhs = 0.0, scale = 1.0 + std::abs(row.rhs);
        for (const auto& [j, v] : row.coeffs) {
            lhs += v * out.x[j];
            scale = std::max(scale, std::abs(v * out.x[j]));
        }
        const double tol = kLpFeasibilityTol * scale;
        const bool ok = equality ? std::abs(lhs - row.rhs) <= tol : lhs >= row.rhs - tol;
        if (!ok) {
            std::ostringstream os;
            os << "simplex solution violates a constraint: lhs " << lhs << " rhs " << row.rhs;
            throw NumericalFailure(os.str());
        }
    };
    for (const auto& r : p.equalities) check(r, true);
    for (const auto& r : p.at_least) check(r, false);
}

}  // namespace

LpOutcome solve(const LpProblem& problem) {
    if (problem.objective.size() != problem.num_vars)
        throw std::invalid_argument("LP objective size does not match variable count");
    for (double c : problem.objective)
        if (!std::isfinite(c)) throw std::invalid_argument("LP objective has a non-finite coefficient");
    if (problem.num_vars == 0) {
        LpOutcome out;
        out.status = LpStatus::Optimal;
        for (const auto& r : problem.equalities)
            if (std::abs(r.rhs) > kLpFeasibilityTol) out.status = LpStatus::Infeasible;
        for (const auto& r : problem.at_least)
            if (r.rhs > kLpFeasibilityTol) out.status = LpStatus::Infeasible;
        return out;
    }
    Tableau t(problem);
    LpOutcome out = t.run(problem);
    if (out.status == LpStatus::Optimal) verify(problem, out);
    return out;
}

std::string to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

std::string dump_lp(const LpProblem& p, const LpOutcome* outcome) {
    std::ostringstream os;
    os.precision(10);
    auto term_list = [&](const LpProblem::Row& r) {
        bool first = true;
        for (const auto& [j, v] : r.coeffs) {
            os << (first ? "" : " ") << (v < 0 ? "- " : (first ? "" : "+ ")) << std::abs(v) << "*x" << j;
            first = false;
        }
        if (first) os << '0';
    };
    os << "maximize";
    bool any = false;
    for (std::size_t j = 0; j < p.num_vars; ++j) {
        if (p.objective[j] == 0.0) continue;
        os << ' ' << (p.objective[j] < 0 ? "- " : (any ? "+ " : "")) << std::abs(p.objective[j]) << "*x" << j;
        any = true;
    }
    if (!any) os << " 0";
    os << "\nsubject to\n";
    for (const auto& r : p.equalities) {
        os << "  ";
        term_list(r);
        os << " = " << r.rhs << '\n';
    }
    for (const auto& r : p.at_least) {
        os << "  ";
        term_list(r);
        os << " >= " << r.rhs << '\n';
    }
    os << "  x >= 0 (" << p.num_vars << " variables)\n";
    if (outcome) {
        os << "status: " << to_string(outcome->status) << '\n';
        if (outcome->status == LpStatus::Optimal) {
            os << "objective: " << outcome->objective << '\n';
            for (std::size_t j = 0; j < outcome->x.size(); ++j)
                if (outcome->x[j] != 0.0) os << "  x" << j << " = " << outcome->x[j] << '\n';
        }
    }
    return os.str();
}

}  // namespace ramcp
