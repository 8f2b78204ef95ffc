#include "ramcp/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ramcp {

char mode_letter(DecisionMode m) {
    switch (m) {
        case DecisionMode::Constrained: return 'C';
        case DecisionMode::RiskMinimizing: return 'R';
        case DecisionMode::Unconstrained: return 'U';
    }
    return '?';
}

double ConstrainedTreeMdp::penalty(std::uint32_t node) const {
    if (nodes[node].kind != Kind::SafeLeaf) return 0.0;
    return 1.0 / std::pow(gamma, steps);
}

ConstrainedTreeMdp build_cmdp(const ClosureTree& closure, const SearchTree& search, const CmdpOptions& options) {
    const ExplicitTree& tree = *closure.tree;
    const Pomdp& model = tree.model();
    ConstrainedTreeMdp m;
    m.gamma = model.discount();
    m.steps = tree.steps();
    m.num_actions = model.num_actions();
    m.num_observations = model.num_observations();
    m.discount.resize(static_cast<std::size_t>(m.steps) + 1);
    m.discount[0] = 1.0;
    for (std::size_t d = 1; d < m.discount.size(); ++d) m.discount[d] = m.discount[d - 1] * m.gamma;

    using Kind = ConstrainedTreeMdp::Kind;
    std::vector<NodeId> search_of;  // search node per cmdp node, or kNoNode
    m.nodes.push_back({Kind::Internal, 0, -1, -1, 1.0, 0.0, tree.root(), 0, 0, 0});
    search_of.push_back(search.root());

    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        if (m.nodes[i].kind != Kind::Internal) continue;
        const NodeId e = m.nodes[i].explicit_id;
        const NodeId s = search_of[i];
        const int depth = m.nodes[i].depth;
        m.nodes[i].first_choice = static_cast<std::uint32_t>(m.choices.size());
        const auto branches = closure.branches_of(e);
        auto br = branches.begin();
        for (std::size_t ai = 0; ai < m.num_actions; ++ai) {
            const auto a = static_cast<ActionId>(ai);
            if (br != branches.end() && br->action == a) {
                const auto choice = static_cast<std::uint32_t>(m.choices.size());
                m.choices.push_back({a, br->rew, false, static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(m.nodes.size()), 0});
                for (const ClosureEdge& edge : closure.edges_of(*br)) {
                    const NodeId sc = s == kNoNode ? kNoNode : search.find_child(s, a, edge.obs);
                    ConstrainedTreeMdp::Node child{Kind::Frontier, depth + 1, a, edge.obs, edge.p, 0.0,
                                                   edge.child, choice, 0, 0};
                    if (edge.child != kNoNode) {
                        child.kind = tree.is_safe_leaf(edge.child) ? Kind::SafeLeaf : Kind::Internal;
                    } else if (depth + 1 < m.steps && sc != kNoNode) {
                        const double v = search.best_value(sc);
                        child.terminal = std::isnan(v) ? 0.0 : v;
                    }
                    m.nodes.push_back(child);
                    search_of.push_back(sc);
                }
                m.choices[choice].num_children = static_cast<std::uint32_t>(m.nodes.size()) - m.choices[choice].first_child;
                ++br;
            } else if (options.sink_branches && s != kNoNode && search.action_visits(s, a) > 0) {
                m.choices.push_back({a, search.value(s, a), true, static_cast<std::uint32_t>(i), 0, 0});
            }
        }
        m.nodes[i].num_choices = static_cast<std::uint32_t>(m.choices.size()) - m.nodes[i].first_choice;
    }
    return m;
}

LpProblem occupancy_lp(const ConstrainedTreeMdp& m, double rbound) {
    using Kind = ConstrainedTreeMdp::Kind;
    LpProblem lp(m.choices.size());
    for (std::size_t j = 0; j < m.choices.size(); ++j) {
        const auto& c = m.choices[j];
        lp.objective[j] += m.discount[static_cast<std::size_t>(m.nodes[c.node].depth)] * c.reward;
    }
    LpProblem::Row safety;
    safety.rhs = 1.0 - rbound;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const auto& n = m.nodes[i];
        if (i == 0) {
            LpProblem::Row root;
            root.rhs = 1.0;
            for (std::uint32_t k = 0; k < n.num_choices; ++k) root.coeffs.emplace_back(n.first_choice + k, 1.0);
            lp.add_equality(std::move(root));
            continue;
        }
        switch (n.kind) {
            case Kind::Internal: {
                LpProblem::Row flow;
                for (std::uint32_t k = 0; k < n.num_choices; ++k) flow.coeffs.emplace_back(n.first_choice + k, 1.0);
                flow.coeffs.emplace_back(n.parent_choice, -n.p);
                lp.add_equality(std::move(flow));
                break;
            }
            case Kind::SafeLeaf:
                safety.coeffs.emplace_back(n.parent_choice, n.p);
                break;
            case Kind::Frontier:
                lp.objective[n.parent_choice] += n.p * m.discount[static_cast<std::size_t>(n.depth)] * n.terminal;
                break;
        }
    }
    lp.add_at_least(std::move(safety));
    return lp;
}

namespace {

using Kind = ConstrainedTreeMdp::Kind;

// Root children occupy nodes 1..count, right after the root.
std::size_t root_child_count(const ConstrainedTreeMdp& m) {
    std::size_t count = 0;
    const auto& root = m.nodes[0];
    for (std::uint32_t k = 0; k < root.num_choices; ++k) count += m.choices[root.first_choice + k].num_children;
    return count;
}

// Unconditional safe mass flowing through every node under occupancies y.
std::vector<double> flowing_safe_mass(const ConstrainedTreeMdp& m, const std::vector<double>& y) {
    std::vector<double> sm(m.nodes.size(), 0.0);
    for (std::size_t i = m.nodes.size(); i-- > 1;) {
        const auto& n = m.nodes[i];
        if (n.kind == Kind::SafeLeaf) {
            sm[i] = n.p * y[n.parent_choice];
        } else if (n.kind == Kind::Internal) {
            double t = 0.0;
            for (std::uint32_t k = 0; k < n.num_choices; ++k) {
                const auto& c = m.choices[n.first_choice + k];
                for (std::uint32_t q = 0; q < c.num_children; ++q) t += sm[c.first_child + q];
            }
            sm[i] = t;
        }
    }
    return sm;
}

ActionDecision empty_decision(std::size_t na, std::size_t nz, double fill) {
    ActionDecision d;
    d.d_pi.assign(na, 0.0);
    d.risk.assign(na, std::vector<double>(nz, fill));
    return d;
}

// d^a(o) = 1 - SafeMass(ao) / z(ao), falling back to the explicit child's U.
void fill_risk(ActionDecision& d, const ConstrainedTreeMdp& m, const ExplicitTree& tree,
               const std::vector<double>& child_z, const std::vector<double>& child_safe) {
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        for (std::size_t o = 0; o < m.num_observations; ++o) {
            const NodeId c = tree.find_child(tree.root(), static_cast<ActionId>(a), static_cast<ObsId>(o));
            d.risk[a][o] = c == kNoNode ? 1.0 : tree.U(c);
        }
    }
    const auto& root = m.nodes[0];
    for (std::uint32_t k = 0; k < root.num_choices; ++k) {
        const auto& c = m.choices[root.first_choice + k];
        for (std::uint32_t q = 0; q < c.num_children; ++q) {
            const std::uint32_t i = c.first_child + q;
            const double z = child_z[i - 1];
            if (z <= kZeroNormalizer) continue;
            const double r = 1.0 - child_safe[i - 1] / z;
            d.risk[static_cast<std::size_t>(c.action)][static_cast<std::size_t>(m.nodes[i].obs)] =
                std::clamp(r, 0.0, 1.0);
        }
    }
}

ActionDecision solve_simplex(const ConstrainedTreeMdp& m, const ExplicitTree& tree, double rbound,
                             std::ostream* dump) {
    const LpProblem lp = occupancy_lp(m, rbound);
    const LpOutcome out = solve(lp);
    if (dump) *dump << dump_lp(lp, &out);
    if (out.status == LpStatus::Infeasible) throw InfeasibleConstraint("constrained MDP has no feasible policy");
    if (out.status == LpStatus::Unbounded) throw NumericalFailure("tree occupancy LP reported unbounded");

    ActionDecision d = empty_decision(m.num_actions, m.num_observations, 1.0);
    d.mode = DecisionMode::Constrained;
    d.objective = out.objective;
    const auto& root = m.nodes[0];
    double total = 0.0;
    for (std::uint32_t k = 0; k < root.num_choices; ++k) {
        const auto& c = m.choices[root.first_choice + k];
        const double y = std::max(0.0, out.x[root.first_choice + k]);
        d.d_pi[static_cast<std::size_t>(c.action)] += y;
        total += y;
    }
    for (double& v : d.d_pi) v /= total;

    const std::vector<double> sm = flowing_safe_mass(m, out.x);
    const std::size_t count = root_child_count(m);
    std::vector<double> z(count, 0.0), safe(count, 0.0);
    for (std::size_t i = 1; i <= count; ++i) {
        z[i - 1] = m.nodes[i].p * out.x[m.nodes[i].parent_choice];
        safe[i - 1] = sm[i];
    }
    fill_risk(d, m, tree, z, safe);
    return d;
}

struct PolicyPoint {
    double value = 0.0;
    double safe = 0.0;
    std::uint32_t root_choice = 0;
    std::vector<double> child_safe;  // conditional safe probability of each root child
};

// Deterministic optimum of value + lambda * safe (lambda < 0 means lexicographic safe-then-value).
PolicyPoint best_response(const ConstrainedTreeMdp& m, double lambda, std::vector<double>& V, std::vector<double>& S) {
    const bool lexicographic = lambda < 0.0;
    V.assign(m.nodes.size(), 0.0);
    S.assign(m.nodes.size(), 0.0);
    std::uint32_t root_choice = 0;
    for (std::size_t i = m.nodes.size(); i-- > 0;) {
        const auto& n = m.nodes[i];
        const double disc = m.discount[static_cast<std::size_t>(n.depth)];
        if (n.kind == Kind::SafeLeaf) {
            S[i] = 1.0;
            continue;
        }
        if (n.kind == Kind::Frontier) {
            V[i] = disc * n.terminal;
            continue;
        }
        double best_v = 0.0, best_s = 0.0;
        std::uint32_t best_k = 0;
        bool have = false;
        for (std::uint32_t k = 0; k < n.num_choices; ++k) {
            const auto& c = m.choices[n.first_choice + k];
            double v = disc * c.reward, s = 0.0;
            for (std::uint32_t q = 0; q < c.num_children; ++q) {
                const std::uint32_t j = c.first_child + q;
                v += m.nodes[j].p * V[j];
                s += m.nodes[j].p * S[j];
            }
            bool better;
            if (!have) {
                better = true;
            } else if (lexicographic) {
                const double ds = s - best_s;
                better = ds > 1e-12 || (ds >= -1e-12 && v > best_v + 1e-12 * (1.0 + std::abs(best_v)));
            } else {
                const double w = v + lambda * s, bw = best_v + lambda * best_s;
                const double tol = 1e-12 * (1.0 + std::abs(bw));
                better = w > bw + tol || (w >= bw - tol && s > best_s + 1e-12);
            }
            if (better) {
                best_v = v;
                best_s = s;
                best_k = k;
                have = true;
            }
        }
        V[i] = best_v;
        S[i] = best_s;
        if (i == 0) root_choice = n.first_choice + best_k;
    }
    PolicyPoint p;
    p.value = V[0];
    p.safe = S[0];
    p.root_choice = root_choice;
    const auto count = static_cast<std::ptrdiff_t>(root_child_count(m));
    p.child_safe.assign(S.begin() + 1, S.begin() + 1 + count);
    return p;
}

ActionDecision solve_parametric(const ConstrainedTreeMdp& m, const ExplicitTree& tree, double rbound) {
    const double target = 1.0 - rbound;
    std::vector<double> V, S;
    PolicyPoint lo = best_response(m, 0.0, V, S);
    PolicyPoint hi;
    double w = 1.0;  // weight on hi
    if (lo.safe >= target - 1e-9) {
        hi = lo;
    } else {
        hi = best_response(m, -1.0, V, S);
        if (hi.safe < target - 1e-9) throw InfeasibleConstraint("constrained MDP has no feasible policy");
        for (int iter = 0; iter < 500; ++iter) {
            const double lambda = std::max(0.0, (lo.value - hi.value) / (hi.safe - lo.safe));
            PolicyPoint p = best_response(m, lambda, V, S);
            const double line = lo.value + lambda * lo.safe;
            if (p.value + lambda * p.safe <= line + 1e-10 * (1.0 + std::abs(line))) break;
            if (p.safe >= target) {
                hi = std::move(p);
            } else {
                lo = std::move(p);
            }
        }
        w = std::clamp((target - lo.safe) / (hi.safe - lo.safe), 0.0, 1.0);
    }

    ActionDecision d = empty_decision(m.num_actions, m.num_observations, 1.0);
    d.mode = DecisionMode::Constrained;
    d.objective = w * hi.value + (1.0 - w) * lo.value;
    d.d_pi[static_cast<std::size_t>(m.choices[hi.root_choice].action)] += w;
    d.d_pi[static_cast<std::size_t>(m.choices[lo.root_choice].action)] += 1.0 - w;

    const std::size_t count = hi.child_safe.size();
    std::vector<double> z(count, 0.0), safe(count, 0.0);
    auto add = [&](const PolicyPoint& pt, double weight) {
        if (weight <= 0.0) return;
        const auto& c = m.choices[pt.root_choice];
        for (std::uint32_t q = 0; q < c.num_children; ++q) {
            const std::uint32_t i = c.first_child + q;
            z[i - 1] += weight * m.nodes[i].p;
            safe[i - 1] += weight * m.nodes[i].p * pt.child_safe[i - 1];
        }
    };
    add(hi, w);
    add(lo, 1.0 - w);
    fill_risk(d, m, tree, z, safe);
    return d;
}

}  // namespace

ActionDecision solve_decision(const ConstrainedTreeMdp& m, const ExplicitTree& tree, double rbound,
                              const SolveOptions& options) {
    if (!(rbound >= 0.0 && rbound <= 1.0)) throw std::invalid_argument("rbound must lie in [0,1]");
    if (m.nodes.empty() || m.nodes[0].num_choices == 0)
        throw InfeasibleConstraint("constrained MDP root has no actions");
    bool simplex = options.route == SolverRoute::Simplex;
    if (options.route == SolverRoute::Auto) simplex = m.variable_count() <= options.simplex_variable_limit;
    if (simplex) return solve_simplex(m, tree, rbound, options.lp_dump);
    if (options.lp_dump)
        *options.lp_dump << "parametric route: " << m.variable_count() << " variables, " << m.nodes.size()
                         << " nodes\n";
    return solve_parametric(m, tree, rbound);
}

double safe_mass(const ConstrainedTreeMdp& m, const std::vector<double>& y) {
    double t = 0.0;
    for (const auto& n : m.nodes)
        if (n.kind == Kind::SafeLeaf) t += n.p * y[n.parent_choice];
    return t;
}

double expected_discounted_penalty(const ConstrainedTreeMdp& m, const std::vector<double>& y) {
    double t = 0.0;
    for (std::size_t i = 1; i < m.nodes.size(); ++i) {
        const auto& n = m.nodes[i];
        const double occupancy = n.p * y[n.parent_choice];
        t += occupancy * m.discount[static_cast<std::size_t>(n.depth)] * m.penalty(static_cast<std::uint32_t>(i));
    }
    return t;
}

ActionDecision risk_min_fallback(const ExplicitTree& tree, const SearchTree& search, std::size_t num_observations) {
    const std::size_t na = tree.model().num_actions();
    ActionDecision d = empty_decision(na, num_observations, 0.0);
    d.mode = DecisionMode::RiskMinimizing;
    ActionId best = -1;
    for (std::size_t a = 0; a < na; ++a) {
        if (!tree.has_children(tree.root(), static_cast<ActionId>(a))) continue;
        if (best < 0 || tree.U_a(tree.root(), static_cast<ActionId>(a)) < tree.U_a(tree.root(), best))
            best = static_cast<ActionId>(a);
    }
    if (best < 0) best = search.best_action(search.root());
    d.d_pi[static_cast<std::size_t>(best)] = 1.0;
    return d;
}

ActionDecision unconstrained_decision(const SearchTree& search, std::size_t num_observations) {
    ActionDecision d = empty_decision(search.num_actions(), num_observations, 1.0);
    d.mode = DecisionMode::Unconstrained;
    d.d_pi[static_cast<std::size_t>(search.best_action(search.root()))] = 1.0;
    return d;
}

}  // namespace ramcp
