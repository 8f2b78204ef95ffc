#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ramcp/model.hpp"
#include "ramcp/sampler.hpp"

namespace ramcp {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr std::size_t kDefaultParticleCap = 10000;

struct SearchNode {
    int visits = 0;
    ActionId action = -1;  // edge from the parent
    ObsId obs = -1;
    NodeId parent = kNoNode;
    NodeId first_child = kNoNode;
    NodeId next_sibling = kNoNode;
    std::uint64_t offered = 0;  // particles offered to the reservoir
    std::vector<StateId> particles;
};

/**
 * POMCP search tree stored as an arena; the root is always node 0.
 * Per-action statistics live in flat arrays indexed by node * |A| + a.
 */
class SearchTree {
public:
    explicit SearchTree(std::size_t num_actions, std::size_t particle_cap = kDefaultParticleCap);

    NodeId root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t num_actions() const { return num_actions_; }

    const SearchNode& node(NodeId n) const { return nodes_[n]; }

    NodeId find_child(NodeId n, ActionId a, ObsId o) const;
    NodeId add_child(NodeId n, ActionId a, ObsId o);

    int visits(NodeId n) const { return nodes_[n].visits; }
    int action_visits(NodeId n, ActionId a) const { return counts_[slot(n, a)]; }
    double value(NodeId n, ActionId a) const { return values_[slot(n, a)]; }
    std::span<const int> action_visits(NodeId n) const { return {&counts_[slot(n, 0)], num_actions_}; }
    std::span<const double> values(NodeId n) const { return {&values_[slot(n, 0)], num_actions_}; }

    /// N += 1, N_a += 1, V_a += (R - V_a) / N_a.
    void record(NodeId n, ActionId a, double ret);
    /// Overwrites statistics; used when update_trees inserts a node.
    void initialize(NodeId n, int visits, ActionId a, int action_visits, double value);

    void add_particle(NodeId n, StateId s, RandomSource& rng);

    /// Best action by V_a among tried actions (all actions if none tried); ties to lowest index.
    ActionId best_action(NodeId n) const;
    /// max_a V_a over tried actions; NaN when nothing was tried.
    double best_value(NodeId n) const;

    /// Replaces the tree by the subtree rooted at child (a, o); empty root if absent.
    void prune_to(ActionId a, ObsId o);

private:
    std::size_t slot(NodeId n, ActionId a) const {
        return static_cast<std::size_t>(n) * num_actions_ + static_cast<std::size_t>(a);
    }
    NodeId push_node();

    std::size_t num_actions_;
    std::size_t particle_cap_;
    std::vector<SearchNode> nodes_;
    std::vector<int> counts_;
    std::vector<double> values_;
};

/**
 * argmax_a V_a + K * sqrt(ln N / N_a). Untried actions win outright (lowest
 * index first); remaining ties go to the lowest index.
 */
ActionId ucb_select(std::span<const int> action_visits, std::span<const double> values, int visits, double K);

inline ActionId ucb_select(const SearchTree& tree, NodeId n, double K) {
    return ucb_select(tree.action_visits(n), tree.values(n), tree.visits(n), K);
}

/// 2 * (r_max - r_min) * (N + 1)
double default_exploration_constant(const Pomdp& model, int horizon);

}  // namespace ramcp
