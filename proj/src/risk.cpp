#include "ramcp/risk.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

namespace ramcp {

namespace {
constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
}

ExplicitTree::ExplicitTree(const Pomdp& model, Belief root_belief, int steps) : model_(&model), steps_(steps) {
    if (steps < 0) throw std::invalid_argument("explicit tree needs a nonnegative step count");
    ExplicitNode root;
    root.belief = std::move(root_belief);
    root.U = 1.0;
    nodes_.push_back(std::move(root));
    ua_.assign(model.num_actions(), kUndefined);
}

std::vector<ActionId> ExplicitTree::allowed_actions(NodeId n) const {
    std::vector<ActionId> out;
    for (std::size_t a = 0; a < model_->num_actions(); ++a)
        if (has_children(n, static_cast<ActionId>(a))) out.push_back(static_cast<ActionId>(a));
    return out;
}

NodeId ExplicitTree::find_child(NodeId n, ActionId a, ObsId o) const {
    for (NodeId c = nodes_[n].first_child; c != kNoNode; c = nodes_[c].next_sibling)
        if (nodes_[c].action == a && nodes_[c].obs == o) return c;
    return kNoNode;
}

NodeId ExplicitTree::add_node(NodeId parent, ActionId a, ObsId o, double p, double rew, Belief b) {
    const auto id = static_cast<NodeId>(nodes_.size());
    ExplicitNode node;
    node.parent = parent;
    node.action = a;
    node.obs = o;
    node.depth = nodes_[parent].depth + 1;
    node.p = p;
    node.rew = rew;
    node.U = 1.0;
    node.belief = std::move(b);
    node.next_sibling = nodes_[parent].first_child;
    nodes_.push_back(std::move(node));
    nodes_[parent].first_child = id;
    ua_.resize(ua_.size() + model_->num_actions(), kUndefined);
    return id;
}

double observable_reward(const Pomdp& model, const Belief& b, ActionId a) {
    const auto sup = b.support();
    if (sup.empty()) throw ModelError("reward requested for an empty belief");
    const double r = model.reward(sup[0].state, a);
    for (const auto& e : sup.subspan(1)) {
        if (std::abs(model.reward(e.state, a) - r) > kStochasticTolerance) {
            throw ModelError("rewards are not observable: states '" +
                             model.state_names()[static_cast<std::size_t>(sup[0].state)] + "' and '" +
                             model.state_names()[static_cast<std::size_t>(e.state)] +
                             "' share a belief but differ under action '" +
                             model.action_names()[static_cast<std::size_t>(a)] + "'");
        }
    }
    return r;
}

double ExplicitTree::action_risk(NodeId n, ActionId a) const {
    double safe = 0.0;
    bool any = false;
    for (NodeId c = nodes_[n].first_child; c != kNoNode; c = nodes_[c].next_sibling) {
        if (nodes_[c].action != a) continue;
        safe += nodes_[c].p * (1.0 - nodes_[c].U);
        any = true;
    }
    return any ? std::max(0.0, 1.0 - safe) : kUndefined;
}

double ExplicitTree::node_risk(NodeId n) const {
    if (nodes_[n].depth == steps_ && n != root()) return 0.0;
    double best = 1.0;
    for (std::size_t a = 0; a < model_->num_actions(); ++a) {
        const double u = ua_[slot(n, static_cast<ActionId>(a))];
        if (!std::isnan(u)) best = std::min(best, u);
    }
    return best;
}

NodeId ExplicitTree::insert(std::span<const PathStep> path) {
    if (path.size() != static_cast<std::size_t>(steps_))
        throw std::invalid_argument("explicit tree insertion needs a history of length " + std::to_string(steps_));
    NodeId cur = root();
    std::size_t k = 0;
    for (; k < path.size(); ++k) {
        const NodeId c = find_child(cur, path[k].action, path[k].obs);
        if (c == kNoNode) break;
        cur = c;
    }
    if (k == path.size()) return kNoNode;

    for (; k < path.size(); ++k) {
        const ActionId a = path[k].action;
        const ObsId o = path[k].obs;
        const double rew = observable_reward(*model_, nodes_[cur].belief, a);
        std::pair<Belief, double> upd;
        try {
            upd = belief_update_with_prob(*model_, nodes_[cur].belief, a, o);
        } catch (const ZeroProbabilityObservation& e) {
            throw BeliefUpdateFailure(std::string("explicit tree: ") + e.what());
        }
        cur = add_node(cur, a, o, upd.second, rew, std::move(upd.first));
    }
    const NodeId leaf = cur;
    nodes_[leaf].U = 0.0;

    for (NodeId g = leaf; g != root();) {
        const NodeId h = nodes_[g].parent;
        const ActionId a = nodes_[g].action;
        ua_[slot(h, a)] = action_risk(h, a);
        const double before = nodes_[h].U;
        nodes_[h].U = node_risk(h);
        if (nodes_[h].U == before) break;  // ancestors depend on h only through U
        g = h;
    }
    return leaf;
}

double ExplicitTree::recompute_risk() {
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const auto n = static_cast<NodeId>(i);
        for (std::size_t a = 0; a < model_->num_actions(); ++a)
            ua_[slot(n, static_cast<ActionId>(a))] = action_risk(n, static_cast<ActionId>(a));
        nodes_[n].U = node_risk(n);
    }
    return nodes_[root()].U;
}

void ExplicitTree::prune_to(ActionId a, ObsId o, const Belief& next_belief) {
    if (steps_ == 0) throw std::logic_error("cannot advance an explicit tree with no remaining steps");
    const NodeId start = find_child(root(), a, o);
    if (start == kNoNode) {
        *this = ExplicitTree(*model_, next_belief, steps_ - 1);
        return;
    }
    const std::size_t na = model_->num_actions();
    std::vector<ExplicitNode> out;
    std::vector<double> ua;
    std::deque<std::pair<NodeId, NodeId>> queue;
    queue.emplace_back(start, kNoNode);
    while (!queue.empty()) {
        auto [old, parent] = queue.front();
        queue.pop_front();
        const auto id = static_cast<NodeId>(out.size());
        ExplicitNode& src = nodes_[old];
        ExplicitNode n;
        n.depth = src.depth - 1;
        n.U = src.U;
        n.belief = std::move(src.belief);
        if (parent != kNoNode) {
            n.parent = parent;
            n.action = src.action;
            n.obs = src.obs;
            n.p = src.p;
            n.rew = src.rew;
            n.next_sibling = out[parent].first_child;
            out[parent].first_child = id;
        }
        out.push_back(std::move(n));
        ua.insert(ua.end(), ua_.begin() + static_cast<std::ptrdiff_t>(slot(old, 0)),
                  ua_.begin() + static_cast<std::ptrdiff_t>(slot(old, 0) + na));
        for (NodeId c = src.first_child; c != kNoNode; c = nodes_[c].next_sibling) queue.emplace_back(c, id);
    }
    nodes_ = std::move(out);
    ua_ = std::move(ua);
    steps_ -= 1;
}

std::string ExplicitTree::dump() const {
    std::ostringstream os;
    os.precision(6);
    const auto& an = model_->action_names();
    const auto& on = model_->observation_names();
    // iterative pre-order walk
    std::vector<NodeId> stack{root()};
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        const ExplicitNode& node = nodes_[n];
        os << std::string(static_cast<std::size_t>(node.depth) * 2, ' ');
        if (n == root()) {
            os << "root";
        } else {
            os << an[static_cast<std::size_t>(node.action)] << '/' << on[static_cast<std::size_t>(node.obs)]
               << " p=" << node.p << " rew=" << node.rew;
        }
        os << " U=" << node.U;
        for (std::size_t a = 0; a < model_->num_actions(); ++a) {
            const double u = ua_[slot(n, static_cast<ActionId>(a))];
            if (!std::isnan(u)) os << " U[" << an[a] << "]=" << u;
        }
        os << '\n';
        std::vector<NodeId> kids;
        for (NodeId c = node.first_child; c != kNoNode; c = nodes_[c].next_sibling) kids.push_back(c);
        std::sort(kids.begin(), kids.end(), [&](NodeId x, NodeId y) {
            return std::pair(nodes_[x].action, nodes_[x].obs) > std::pair(nodes_[y].action, nodes_[y].obs);
        });
        stack.insert(stack.end(), kids.begin(), kids.end());
    }
    return os.str();
}

void update_trees(ExplicitTree& exp, SearchTree& search, std::span<const PathStep> path, double gamma,
                  RandomSource& rng, NodeId anchor, std::size_t anchor_len) {
    if (exp.insert(path) == kNoNode) return;

    // discounted suffix payoffs: suffix[k] = r_k + gamma * suffix[k+1]
    thread_local std::vector<double> suffix;
    suffix.assign(path.size() + 1, 0.0);
    for (std::size_t k = path.size(); k-- > 0;) suffix[k] = path[k].reward + gamma * suffix[k + 1];

    NodeId cur = anchor;
    // prefixes of length 1..steps-1; the full-length leaf takes no action
    for (std::size_t k = anchor_len; k + 1 < path.size(); ++k) {
        NodeId next = search.find_child(cur, path[k].action, path[k].obs);
        if (next == kNoNode) {
            next = search.add_child(cur, path[k].action, path[k].obs);
            search.initialize(next, 1, path[k + 1].action, 1, suffix[k + 1]);
            search.add_particle(next, path[k].state, rng);
        }
        cur = next;
    }
}

std::size_t ClosureTree::frontier_count() const {
    std::size_t n = 0;
    for (const auto& e : edges)
        if (e.child == kNoNode) ++n;
    return n;
}

ClosureTree closure(const ExplicitTree& tree) {
    ClosureTree out;
    out.tree = &tree;
    out.first_branch.reserve(tree.size() + 1);
    const Pomdp& model = tree.model();
    for (NodeId n = 0; n < tree.size(); ++n) {
        out.first_branch.push_back(out.branches.size());
        const ExplicitNode& node = tree.node(n);
        if (node.first_child == kNoNode) continue;
        for (std::size_t ai = 0; ai < model.num_actions(); ++ai) {
            const auto a = static_cast<ActionId>(ai);
            if (!tree.has_children(n, a)) continue;
            ClosureBranch br{n, a, observable_reward(model, node.belief, a), out.edges.size(), 0};
            for (const Emission& em : observation_distribution(model, node.belief, a)) {
                const NodeId child = tree.find_child(n, a, em.obs);
                out.edges.push_back({em.obs, child == kNoNode ? em.prob : tree.node(child).p, child});
            }
            br.num_edges = out.edges.size() - br.first_edge;
            out.branches.push_back(br);
        }
    }
    out.first_branch.push_back(out.branches.size());
    return out;
}

}  // namespace ramcp
