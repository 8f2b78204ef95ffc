#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramcp/model.hpp"
#include "ramcp/sampler.hpp"
#include "ramcp/search.hpp"

namespace ramcp {

/// A safe history needed conditioning on a zero-probability observation.
class BeliefUpdateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One simulated step: action, observation, reward r(s,a) and successor state.
struct PathStep {
    ActionId action;
    ObsId obs;
    double reward;
    StateId state;
};

struct ExplicitNode {
    NodeId parent = kNoNode;
    ActionId action = -1;  // edge from the parent
    ObsId obs = -1;
    NodeId first_child = kNoNode;
    NodeId next_sibling = kNoNode;
    int depth = 0;     // relative to the current root
    double p = 1.0;    // p(parent, node)
    double rew = 0.0;  // rew(parent, node)
    double U = 1.0;
    Belief belief;
};

/**
 * Explicit tree of safe histories below the current root.
 *
 * Leaves sit at depth steps() and are exactly the inserted safe histories
 * (U = 0). Internal U_a is NaN for actions without children. Node ids are
 * ordered so that parents precede children.
 */
class ExplicitTree {
public:
    ExplicitTree(const Pomdp& model, Belief root_belief, int steps);

    const Pomdp& model() const { return *model_; }
    int steps() const { return steps_; }
    NodeId root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    const ExplicitNode& node(NodeId n) const { return nodes_[n]; }

    double U(NodeId n) const { return nodes_[n].U; }
    double U_a(NodeId n, ActionId a) const { return ua_[slot(n, a)]; }
    bool has_children(NodeId n, ActionId a) const { return !std::isnan(ua_[slot(n, a)]); }
    bool is_safe_leaf(NodeId n) const { return nodes_[n].depth == steps_; }
    std::vector<ActionId> allowed_actions(NodeId n) const;

    NodeId find_child(NodeId n, ActionId a, ObsId o) const;

    /**
     * Adds every missing prefix of a safe history of length steps() and
     * updates U along it. Returns the new leaf, or kNoNode if the history was
     * already present.
     */
    NodeId insert(std::span<const PathStep> path);

    /// Full bottom-up recomputation of every U_a and U; returns the root U.
    double recompute_risk();

    /// Re-roots at child (a, o); an absent child yields a fresh root with U = 1.
    void prune_to(ActionId a, ObsId o, const Belief& next_belief);

    std::string dump() const;

private:
    std::size_t slot(NodeId n, ActionId a) const {
        return static_cast<std::size_t>(n) * model_->num_actions() + static_cast<std::size_t>(a);
    }
    NodeId add_node(NodeId parent, ActionId a, ObsId o, double p, double rew, Belief b);
    double action_risk(NodeId n, ActionId a) const;
    double node_risk(NodeId n) const;

    const Pomdp* model_;
    int steps_;
    std::vector<ExplicitNode> nodes_;
    std::vector<double> ua_;
};

/// rew(h, a): the reward shared by every state in the support; throws if they disagree.
double observable_reward(const Pomdp& model, const Belief& b, ActionId a);

/**
 * Inserts a safe simulated history into both trees. Search-tree prefixes
 * that were missing get N = 1, N_a = 1 and V_a equal to the discounted
 * suffix payoff for the action taken there. `anchor` is a search node known
 * to represent the first `anchor_len` steps of the path.
 */
void update_trees(ExplicitTree& exp, SearchTree& search, std::span<const PathStep> path, double gamma,
                  RandomSource& rng, NodeId anchor = 0, std::size_t anchor_len = 0);

struct ClosureEdge {
    ObsId obs;
    double p;
    NodeId child;  // explicit node, or kNoNode for a frontier node
};

struct ClosureBranch {
    NodeId node;
    ActionId action;
    double rew;
    std::size_t first_edge;
    std::size_t num_edges;
};

/**
 * For every explicit node and allowed action, the full positive-probability
 * observation distribution; observations missing from the explicit tree are
 * frontier nodes with U = 1.
 */
struct ClosureTree {
    const ExplicitTree* tree = nullptr;
    std::vector<ClosureBranch> branches;
    std::vector<ClosureEdge> edges;
    std::vector<std::size_t> first_branch;  // per explicit node, plus sentinel

    std::span<const ClosureBranch> branches_of(NodeId n) const {
        return {branches.data() + first_branch[n], first_branch[n + 1] - first_branch[n]};
    }
    std::span<const ClosureEdge> edges_of(const ClosureBranch& b) const {
        return {edges.data() + b.first_edge, b.num_edges};
    }
    std::size_t frontier_count() const;
};

ClosureTree closure(const ExplicitTree& tree);

}  // namespace ramcp
