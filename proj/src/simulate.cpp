#include "ramcp/simulate.hpp"

namespace ramcp {

namespace {

double finish(SimContext& ctx, double pay, int level) {
    if (meets_threshold(pay, ctx.thr)) {
        update_trees(ctx.explicit_tree, ctx.search,
                     std::span<const PathStep>(ctx.path.data(), static_cast<std::size_t>(level)),
                     ctx.model.discount(), ctx.rng, ctx.anchor, static_cast<std::size_t>(ctx.anchor_len));
    }
    return 0.0;
}

void ensure_path(SimContext& ctx, int level, int depth) {
    const auto need = static_cast<std::size_t>(level + depth);
    if (ctx.path.size() < need) ctx.path.resize(need);
}

}  // namespace

double simulate(SimContext& ctx, StateId s, NodeId node, int depth, double pay, double disc, int level) {
    if (depth == 0) return finish(ctx, pay, level);
    ensure_path(ctx, level, depth);
    const double gamma = ctx.model.discount();

    ctx.search.add_particle(node, s, ctx.rng);
    const ActionId a = ucb_select(ctx.search, node, ctx.K);
    const StepSample step = sample_step(ctx.model, s, a, ctx.rng);
    ctx.path[static_cast<std::size_t>(level)] = {a, step.obs, step.reward, step.next};
    const double next_pay = pay + disc * step.reward;

    double tail;
    ctx.anchor = node;
    ctx.anchor_len = level;
    if (depth == 1) {
        tail = finish(ctx, next_pay, level + 1);
    } else {
        NodeId child = ctx.search.find_child(node, a, step.obs);
        if (child == kNoNode) {
            child = ctx.search.add_child(node, a, step.obs);
            ctx.search.add_particle(child, step.next, ctx.rng);
            ctx.anchor = child;
            ctx.anchor_len = level + 1;
            tail = rollout(ctx, step.next, depth - 1, next_pay, disc * gamma, level + 1);
        } else {
            tail = simulate(ctx, step.next, child, depth - 1, next_pay, disc * gamma, level + 1);
        }
    }
    const double ret = step.reward + gamma * tail;
    ctx.search.record(node, a, ret);
    return ret;
}

double rollout(SimContext& ctx, StateId s, int depth, double pay, double disc, int level) {
    ensure_path(ctx, level, depth);
    const double gamma = ctx.model.discount();
    const std::size_t na = ctx.model.num_actions();
    double ret = 0.0, factor = 1.0;
    for (; depth > 0; --depth, ++level) {
        const auto a = static_cast<ActionId>(ctx.rng.below(na));
        const StepSample step = sample_step(ctx.model, s, a, ctx.rng);
        ctx.path[static_cast<std::size_t>(level)] = {a, step.obs, step.reward, step.next};
        pay += disc * step.reward;
        ret += factor * step.reward;
        factor *= gamma;
        disc *= gamma;
        s = step.next;
    }
    finish(ctx, pay, level);
    return ret;
}

void run_simulations(SimContext& ctx, const Belief& root_belief, int depth, long count) {
    for (long i = 0; i < count; ++i) {
        const StateId s = sample_state(root_belief, ctx.rng);
        simulate(ctx, s, ctx.search.root(), depth, 0.0, 1.0, 0);
    }
}

}  // namespace ramcp
