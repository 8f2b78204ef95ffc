#include "ramcp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

#include "ramcp/lp.hpp"

namespace ramcp {

namespace {

std::string belief_key(const Belief& b) {
    std::string key;
    key.resize(b.support_size() * sizeof(Belief::Entry));
    std::size_t off = 0;
    for (const auto& e : b.support()) {
        std::memcpy(key.data() + off, &e.state, sizeof(StateId));
        std::memcpy(key.data() + off + sizeof(StateId), &e.weight, sizeof(double));
        off += sizeof(StateId) + sizeof(double);
    }
    key.resize(off);
    return key;
}

std::string node_key(double pay, const Belief& b) {
    std::string key(sizeof(double), '\0');
    std::memcpy(key.data(), &pay, sizeof(double));
    return key + belief_key(b);
}

double reward_of(const Pomdp& model, const Belief& b, ActionId a) {
    const auto sup = b.support();
    const double r = model.reward(sup[0].state, a);
    for (const auto& e : sup)
        if (std::abs(model.reward(e.state, a) - r) > kStochasticTolerance)
            throw ModelError("oracle requires observable rewards");
    return r;
}

}  // namespace

HistoryDag build_history_dag(const Pomdp& model, const Belief& root, double tau, int steps,
                             const OracleOptions& options) {
    if (steps < 1) throw std::invalid_argument("history DAG needs at least one decision");
    HistoryDag dag;
    dag.steps = steps;
    dag.gamma = model.discount();
    dag.nodes.push_back({0, 0.0, root, false, false, 0, 0});

    std::size_t level_begin = 0;
    double disc = 1.0;
    for (int depth = 0; depth < steps; ++depth) {
        const std::size_t level_end = dag.nodes.size();
        std::unordered_map<std::string, std::uint32_t> next_level;
        std::uint32_t leaf_ids[2] = {UINT32_MAX, UINT32_MAX};
        const bool last = depth + 1 == steps;
        for (std::size_t i = level_begin; i < level_end; ++i) {
            dag.nodes[i].first_branch = static_cast<std::uint32_t>(dag.branches.size());
            for (std::size_t ai = 0; ai < model.num_actions(); ++ai) {
                const auto a = static_cast<ActionId>(ai);
                const Belief b = dag.nodes[i].belief;  // copy: nodes may reallocate below
                const double pay = dag.nodes[i].pay;
                const double rew = reward_of(model, b, a);
                HistoryDag::Branch br{a, rew, static_cast<std::uint32_t>(dag.edges.size()), 0};
                const double child_pay = pay + disc * rew;
                for (const Emission& em : observation_distribution(model, b, a)) {
                    std::uint32_t child;
                    if (last) {
                        const bool safe = meets_threshold(child_pay, tau);
                        std::uint32_t& slot = leaf_ids[safe ? 1 : 0];
                        if (slot == UINT32_MAX) {
                            slot = static_cast<std::uint32_t>(dag.nodes.size());
                            dag.nodes.push_back({depth + 1, 0.0, Belief(), true, safe, 0, 0});
                        }
                        child = slot;
                    } else {
                        Belief nb = belief_update(model, b, a, em.obs);
                        auto [it, fresh] = next_level.try_emplace(node_key(child_pay, nb),
                                                                  static_cast<std::uint32_t>(dag.nodes.size()));
                        if (fresh) dag.nodes.push_back({depth + 1, child_pay, std::move(nb), false, false, 0, 0});
                        child = it->second;
                    }
                    dag.edges.push_back({child, em.prob});
                    if (dag.nodes.size() > options.max_nodes)
                        throw SizeGuardExceeded("history DAG exceeds " + std::to_string(options.max_nodes) + " nodes");
                }
                br.num_edges = static_cast<std::uint32_t>(dag.edges.size()) - br.first_edge;
                dag.branches.push_back(br);
            }
            dag.nodes[i].num_branches = static_cast<std::uint32_t>(dag.branches.size()) - dag.nodes[i].first_branch;
        }
        level_begin = level_end;
        disc *= dag.gamma;
    }
    return dag;
}

EopgResult exact_eopg(const HistoryDag& dag, double alpha) {
    // variables: one per branch (internal node, action)
    LpProblem lp(dag.branches.size());
    std::vector<double> disc(static_cast<std::size_t>(dag.steps) + 1, 1.0);
    for (std::size_t d = 1; d < disc.size(); ++d) disc[d] = disc[d - 1] * dag.gamma;

    std::vector<LpProblem::Row> inflow(dag.nodes.size());
    LpProblem::Row safety;
    safety.rhs = 1.0 - alpha;
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const auto& n = dag.nodes[i];
        for (std::uint32_t k = 0; k < n.num_branches; ++k) {
            const std::uint32_t j = n.first_branch + k;
            const auto& br = dag.branches[j];
            lp.objective[j] = disc[static_cast<std::size_t>(n.depth)] * br.rew;
            for (std::uint32_t q = 0; q < br.num_edges; ++q) {
                const auto& e = dag.edges[br.first_edge + q];
                const auto& child = dag.nodes[e.child];
                if (child.leaf) {
                    if (child.safe) safety.coeffs.emplace_back(j, e.p);
                } else {
                    inflow[e.child].coeffs.emplace_back(j, -e.p);
                }
            }
        }
    }
    for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
        const auto& n = dag.nodes[i];
        if (n.leaf) continue;
        LpProblem::Row row = std::move(inflow[i]);
        for (std::uint32_t k = 0; k < n.num_branches; ++k) row.coeffs.emplace_back(n.first_branch + k, 1.0);
        row.rhs = i == 0 ? 1.0 : 0.0;
        lp.add_equality(std::move(row));
    }
    lp.add_at_least(std::move(safety));

    const LpOutcome out = solve(lp);
    EopgResult res;
    if (out.status != LpStatus::Optimal) return res;
    res.feasible = true;
    res.value = out.objective;
    const auto& root = dag.nodes[0];
    std::size_t na = 0;
    for (std::uint32_t k = 0; k < root.num_branches; ++k)
        na = std::max(na, static_cast<std::size_t>(dag.branches[root.first_branch + k].action) + 1);
    res.root_distribution.assign(na, 0.0);
    for (std::uint32_t k = 0; k < root.num_branches; ++k)
        res.root_distribution[static_cast<std::size_t>(dag.branches[root.first_branch + k].action)] =
            out.x[root.first_branch + k];
    return res;
}

EopgResult exact_eopg(const Pomdp& model, double tau, double alpha, int horizon, const OracleOptions& options) {
    return exact_eopg(build_history_dag(model, model.initial_belief(), tau, decision_steps(horizon), options), alpha);
}

double exact_min_risk(const HistoryDag& dag) {
    std::vector<double> psi(dag.nodes.size(), 1.0);
    for (std::size_t i = dag.nodes.size(); i-- > 0;) {
        const auto& n = dag.nodes[i];
        if (n.leaf) {
            psi[i] = n.safe ? 0.0 : 1.0;
            continue;
        }
        double best = 1.0;
        for (std::uint32_t k = 0; k < n.num_branches; ++k) {
            const auto& br = dag.branches[n.first_branch + k];
            double safe = 0.0;
            for (std::uint32_t q = 0; q < br.num_edges; ++q) {
                const auto& e = dag.edges[br.first_edge + q];
                safe += e.p * (1.0 - psi[e.child]);
            }
            best = std::min(best, 1.0 - safe);
        }
        psi[i] = best;
    }
    return psi[0];
}

double exact_min_risk(const Pomdp& model, double tau, int horizon, const OracleOptions& options) {
    return exact_min_risk(build_history_dag(model, model.initial_belief(), tau, decision_steps(horizon), options));
}

namespace {

struct Point {
    double safe;
    double value;
};

// Keeps points not dominated in (safe, value); result sorted by safe ascending, value descending.
void pareto_prune(std::vector<Point>& pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.safe != b.safe ? a.safe > b.safe : a.value > b.value;
    });
    std::vector<Point> out;
    for (const auto& p : pts) {
        if (!out.empty() && p.value <= out.back().value) continue;
        out.push_back(p);
    }
    std::reverse(out.begin(), out.end());
    pts = std::move(out);
}

}  // namespace

DeterministicResult best_deterministic(const HistoryDag& dag, double alpha, const OracleOptions& options) {
    std::vector<double> disc(static_cast<std::size_t>(dag.steps) + 1, 1.0);
    for (std::size_t d = 1; d < disc.size(); ++d) disc[d] = disc[d - 1] * dag.gamma;

    std::vector<std::vector<Point>> sets(dag.nodes.size());
    for (std::size_t i = dag.nodes.size(); i-- > 0;) {
        const auto& n = dag.nodes[i];
        if (n.leaf) {
            sets[i] = {{n.safe ? 1.0 : 0.0, 0.0}};
            continue;
        }
        std::vector<Point> all;
        for (std::uint32_t k = 0; k < n.num_branches; ++k) {
            const auto& br = dag.branches[n.first_branch + k];
            std::vector<Point> acc{{0.0, disc[static_cast<std::size_t>(n.depth)] * br.rew}};
            for (std::uint32_t q = 0; q < br.num_edges; ++q) {
                const auto& e = dag.edges[br.first_edge + q];
                std::vector<Point> next;
                next.reserve(acc.size() * sets[e.child].size());
                for (const auto& x : acc)
                    for (const auto& y : sets[e.child]) next.push_back({x.safe + e.p * y.safe, x.value + e.p * y.value});
                pareto_prune(next);
                if (next.size() > options.max_frontier)
                    throw SizeGuardExceeded("deterministic Pareto set exceeds " + std::to_string(options.max_frontier));
                acc = std::move(next);
            }
            all.insert(all.end(), acc.begin(), acc.end());
        }
        pareto_prune(all);
        sets[i] = std::move(all);
    }
    DeterministicResult res;
    for (const auto& p : sets[0]) {
        if (p.safe >= 1.0 - alpha - kThresholdTolerance && (!res.feasible || p.value > res.value)) {
            res.feasible = true;
            res.value = p.value;
        }
    }
    return res;
}

DeterministicResult best_deterministic(const Pomdp& model, double tau, double alpha, int horizon,
                                       const OracleOptions& options) {
    return best_deterministic(build_history_dag(model, model.initial_belief(), tau, decision_steps(horizon), options),
                              alpha, options);
}

namespace {

double value_memo(const Pomdp& model, const Belief& b, int steps, std::unordered_map<std::string, double>& memo);

std::vector<double> q_memo(const Pomdp& model, const Belief& b, int steps,
                           std::unordered_map<std::string, double>& memo) {
    std::vector<double> q(model.num_actions(), 0.0);
    for (std::size_t ai = 0; ai < model.num_actions(); ++ai) {
        const auto a = static_cast<ActionId>(ai);
        double v = reward_of(model, b, a);
        if (steps > 1) {
            for (const Emission& em : observation_distribution(model, b, a))
                v += model.discount() * em.prob * value_memo(model, belief_update(model, b, a, em.obs), steps - 1, memo);
        }
        q[ai] = v;
    }
    return q;
}

double value_memo(const Pomdp& model, const Belief& b, int steps, std::unordered_map<std::string, double>& memo) {
    if (steps <= 0) return 0.0;
    std::string key = std::to_string(steps) + ':' + belief_key(b);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto q = q_memo(model, b, steps, memo);
    const double v = *std::max_element(q.begin(), q.end());
    memo.emplace(std::move(key), v);
    return v;
}

}  // namespace

double unconstrained_value(const Pomdp& model, const Belief& b, int steps) {
    std::unordered_map<std::string, double> memo;
    return value_memo(model, b, steps, memo);
}

std::vector<double> optimal_action_values(const Pomdp& model, const Belief& b, int steps) {
    if (steps <= 0) return std::vector<double>(model.num_actions(), 0.0);
    std::unordered_map<std::string, double> memo;
    return q_memo(model, b, steps, memo);
}

}  // namespace ramcp
