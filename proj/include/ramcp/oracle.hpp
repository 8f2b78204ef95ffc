#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ramcp/model.hpp"

namespace ramcp {

class SizeGuardExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleOptions {
    std::size_t max_nodes = 200000;    // distinct (depth, payoff, belief) nodes
    std::size_t max_frontier = 200000;  // Pareto points per node for best_deterministic
};

/**
 * The depth-(N+1) history tree with nodes merged when they share depth,
 * accumulated discounted payoff (bitwise) and belief (bitwise). Every policy
 * question about the tree has the same answer on this DAG. Leaves are merged
 * into one safe and one unsafe node.
 */
struct HistoryDag {
    struct Edge {
        std::uint32_t child;
        double p;
    };
    struct Branch {
        ActionId action;
        double rew;
        std::uint32_t first_edge;
        std::uint32_t num_edges;
    };
    struct Node {
        int depth;
        double pay;
        Belief belief;
        bool leaf;
        bool safe;
        std::uint32_t first_branch;
        std::uint32_t num_branches;
    };

    int steps = 0;
    double gamma = 0.0;
    std::vector<Node> nodes;  // parents precede children
    std::vector<Branch> branches;
    std::vector<Edge> edges;
};

HistoryDag build_history_dag(const Pomdp& model, const Belief& root, double tau, int steps,
                             const OracleOptions& options = {});

struct EopgResult {
    bool feasible = false;
    double value = 0.0;
    std::vector<double> root_distribution;  // per action
};

/// rho(tau, alpha) over policies for Disc_{gamma,N}: the occupancy LP on the full history DAG.
EopgResult exact_eopg(const Pomdp& model, double tau, double alpha, int horizon, const OracleOptions& options = {});
EopgResult exact_eopg(const HistoryDag& dag, double alpha);

/// inf over policies of P(Disc_{gamma,N} < tau).
double exact_min_risk(const Pomdp& model, double tau, int horizon, const OracleOptions& options = {});
double exact_min_risk(const HistoryDag& dag);

struct DeterministicResult {
    bool feasible = false;
    double value = 0.0;
};

/// Best deterministic policy with risk <= alpha, via exact Pareto sets of (safe mass, value).
DeterministicResult best_deterministic(const Pomdp& model, double tau, double alpha, int horizon,
                                       const OracleOptions& options = {});
DeterministicResult best_deterministic(const HistoryDag& dag, double alpha, const OracleOptions& options = {});

/// Optimal unconstrained expected Disc over `steps` decisions from belief b.
double unconstrained_value(const Pomdp& model, const Belief& b, int steps);
/// Q(b, a) = rew(b, a) + gamma * sum_o p(o) * V(b_ao, steps - 1).
std::vector<double> optimal_action_values(const Pomdp& model, const Belief& b, int steps);

}  // namespace ramcp
