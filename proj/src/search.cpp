#include "ramcp/search.hpp"

#include <cmath>
#include <deque>

namespace ramcp {

SearchTree::SearchTree(std::size_t num_actions, std::size_t particle_cap)
    : num_actions_(num_actions), particle_cap_(particle_cap) {
    push_node();
}

NodeId SearchTree::push_node() {
    nodes_.emplace_back();
    counts_.resize(counts_.size() + num_actions_, 0);
    values_.resize(values_.size() + num_actions_, 0.0);
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId SearchTree::find_child(NodeId n, ActionId a, ObsId o) const {
    for (NodeId c = nodes_[n].first_child; c != kNoNode; c = nodes_[c].next_sibling) {
        if (nodes_[c].action == a && nodes_[c].obs == o) return c;
    }
    return kNoNode;
}

NodeId SearchTree::add_child(NodeId n, ActionId a, ObsId o) {
    const NodeId c = push_node();
    SearchNode& child = nodes_[c];
    child.action = a;
    child.obs = o;
    child.parent = n;
    child.next_sibling = nodes_[n].first_child;
    nodes_[n].first_child = c;
    return c;
}

void SearchTree::record(NodeId n, ActionId a, double ret) {
    nodes_[n].visits += 1;
    const std::size_t k = slot(n, a);
    counts_[k] += 1;
    values_[k] += (ret - values_[k]) / counts_[k];
}

void SearchTree::initialize(NodeId n, int visits, ActionId a, int action_visits, double value) {
    nodes_[n].visits = visits;
    counts_[slot(n, a)] = action_visits;
    values_[slot(n, a)] = value;
}

void SearchTree::add_particle(NodeId n, StateId s, RandomSource& rng) {
    SearchNode& node = nodes_[n];
    node.offered += 1;
    if (node.particles.size() < particle_cap_) {
        node.particles.push_back(s);
        return;
    }
    const std::size_t j = rng.below(static_cast<std::size_t>(node.offered));
    if (j < particle_cap_) node.particles[j] = s;
}

ActionId SearchTree::best_action(NodeId n) const {
    ActionId best = -1;
    for (std::size_t a = 0; a < num_actions_; ++a) {
        const std::size_t k = slot(n, static_cast<ActionId>(a));
        if (counts_[k] == 0) continue;
        if (best < 0 || values_[k] > values_[slot(n, best)]) best = static_cast<ActionId>(a);
    }
    if (best >= 0) return best;
    best = 0;
    for (std::size_t a = 1; a < num_actions_; ++a)
        if (values_[slot(n, static_cast<ActionId>(a))] > values_[slot(n, best)]) best = static_cast<ActionId>(a);
    return best;
}

double SearchTree::best_value(NodeId n) const {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t a = 0; a < num_actions_; ++a) {
        const std::size_t k = slot(n, static_cast<ActionId>(a));
        if (counts_[k] == 0) continue;
        if (std::isnan(best) || values_[k] > best) best = values_[k];
    }
    return best;
}

void SearchTree::prune_to(ActionId a, ObsId o) {
    const NodeId start = find_child(root(), a, o);
    SearchTree out(num_actions_, particle_cap_);
    if (start == kNoNode) {
        *this = std::move(out);
        return;
    }
    out.nodes_.clear();
    out.counts_.clear();
    out.values_.clear();

    // breadth-first copy keeps parents before children
    std::deque<std::pair<NodeId, NodeId>> queue;  // (old id, new parent)
    queue.emplace_back(start, kNoNode);
    while (!queue.empty()) {
        auto [old, parent] = queue.front();
        queue.pop_front();
        const NodeId id = out.push_node();
        SearchNode& src = nodes_[old];
        SearchNode& dst = out.nodes_[id];
        dst.visits = src.visits;
        dst.offered = src.offered;
        dst.particles = std::move(src.particles);
        if (parent != kNoNode) {
            dst.action = src.action;
            dst.obs = src.obs;
            dst.parent = parent;
            dst.next_sibling = out.nodes_[parent].first_child;
            out.nodes_[parent].first_child = id;
        }
        for (std::size_t k = 0; k < num_actions_; ++k) {
            out.counts_[out.slot(id, static_cast<ActionId>(k))] = counts_[slot(old, static_cast<ActionId>(k))];
            out.values_[out.slot(id, static_cast<ActionId>(k))] = values_[slot(old, static_cast<ActionId>(k))];
        }
        for (NodeId c = src.first_child; c != kNoNode; c = nodes_[c].next_sibling) queue.emplace_back(c, id);
    }
    *this = std::move(out);
}

ActionId ucb_select(std::span<const int> action_visits, std::span<const double> values, int visits, double K) {
    for (std::size_t a = 0; a < action_visits.size(); ++a)
        if (action_visits[a] == 0) return static_cast<ActionId>(a);
    const double log_n = std::log(static_cast<double>(std::max(visits, 1)));
    ActionId best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < action_visits.size(); ++a) {
        const double score = values[a] + K * std::sqrt(log_n / action_visits[a]);
        if (score > best_score) {
            best_score = score;
            best = static_cast<ActionId>(a);
        }
    }
    return best;
}

double default_exploration_constant(const Pomdp& model, int horizon) {
    return 2.0 * (model.max_reward() - model.min_reward()) * (horizon + 1);
}

}  // namespace ramcp
