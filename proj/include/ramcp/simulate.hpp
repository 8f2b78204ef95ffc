#pragma once

#include <vector>

#include "ramcp/model.hpp"
#include "ramcp/risk.hpp"
#include "ramcp/sampler.hpp"
#include "ramcp/search.hpp"

namespace ramcp {

/**
 * Everything one search phase needs. `thr` is root-relative; `pay` passed
 * through the recursion is the discounted payoff accumulated since the root,
 * so the depth-0 test compares like with like.
 */
struct SimContext {
    const Pomdp& model;
    SearchTree& search;
    ExplicitTree& explicit_tree;
    RandomSource& rng;
    double thr;
    double K;
    std::vector<PathStep> path;  // steps taken since the root in the current simulation
    NodeId anchor = 0;           // deepest search node on the current path
    int anchor_len = 0;          // its depth below the root

    SimContext(const Pomdp& m, SearchTree& s, ExplicitTree& e, RandomSource& r, double threshold, double k)
        : model(m), search(s), explicit_tree(e), rng(r), thr(threshold), K(k) {}
};

/**
 * One POMCP simulation from `node` (which must exist in the search tree) with
 * `depth` decisions left. `level` is the number of steps already taken from
 * the root and `disc` equals gamma^level. Returns the discounted return.
 */
double simulate(SimContext& ctx, StateId s, NodeId node, int depth, double pay, double disc, int level);

/// Uniform-random continuation beyond the search tree.
double rollout(SimContext& ctx, StateId s, int depth, double pay, double disc, int level);

/// Runs `count` simulations from the root, each from a state drawn from `root_belief`.
void run_simulations(SimContext& ctx, const Belief& root_belief, int depth, long count);

}  // namespace ramcp
