#pragma once

// Shared test scaffolding: random tiny POMDPs, brute-force reference
// solvers on dense beliefs, and helpers that force the planner trees into a
// known state.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ramcp/model.hpp"
#include "ramcp/oracle.hpp"
#include "ramcp/risk.hpp"
#include "ramcp/search.hpp"

namespace fixtures {

using namespace ramcp;

/**
 * |S| <= 3, |A| = |Z| = 2. Observations are a deterministic function of the
 * state and rewards a function of (observation, action), so rewards are
 * observable. The initial belief lives inside one observation class.
 */
inline Pomdp random_tiny_pomdp(std::uint64_t seed, double discount = 0.9) {
    std::mt19937_64 gen(seed);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
    const int ns = 2 + static_cast<int>(gen() % 2);
    std::vector<int> obs_of(static_cast<std::size_t>(ns));
    obs_of[0] = 0;
    obs_of[1] = 1;
    if (ns == 3) obs_of[2] = static_cast<int>(gen() % 2);
    std::vector<std::string> states;
    for (int s = 0; s < ns; ++s) states.push_back("s" + std::to_string(s));
    PomdpBuilder b(states, {"a0", "a1"}, {"z0", "z1"}, discount);
    double rew[2][2];
    for (auto& row : rew)
        for (double& r : row) r = static_cast<double>(static_cast<int>(gen() % 7) - 3);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < 2; ++a) {
            std::vector<double> w(static_cast<std::size_t>(ns));
            for (double& x : w) x = gen() % 3 == 0 ? 0.0 : uni(0.1, 1.0);
            if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[gen() % w.size()] = 1.0;
            double t = 0.0;
            for (double x : w) t += x;
            for (int n = 0; n < ns; ++n)
                if (w[static_cast<std::size_t>(n)] > 0.0) b.set_transition(s, a, n, w[static_cast<std::size_t>(n)] / t);
            b.set_reward(s, a, rew[obs_of[static_cast<std::size_t>(s)]][a]);
        }
        b.set_observation(s, obs_of[static_cast<std::size_t>(s)], 1.0);
    }
    std::vector<double> init(static_cast<std::size_t>(ns), 0.0);
    init[0] = 1.0;
    if (ns == 3 && obs_of[2] == 0) {
        init[0] = 0.5;
        init[2] = 0.5;
    }
    b.set_initial(init);
    return b.build();
}

/// A threshold that splits the payoff range of a tiny model.
inline double random_threshold(std::uint64_t seed, const Pomdp& m, int horizon) {
    std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
    double span = 0.0, g = 1.0;
    for (int i = 0; i <= horizon; ++i, g *= m.discount()) span += g;
    const double lo = std::min(0.0, m.min_reward()) * span, hi = std::max(0.0, m.max_reward()) * span;
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.2, 0.8)(gen);
}

// ---------------------------------------------------------------------------
// Dense brute force, written without the library's belief or oracle code.

using Dense = std::vector<double>;

struct Successor {
    ObsId obs;
    double p;
    Dense belief;
};

inline std::vector<Successor> successors(const Pomdp& m, const Dense& b, ActionId a) {
    const std::size_t ns = m.num_states();
    std::vector<Successor> out;
    for (std::size_t o = 0; o < m.num_observations(); ++o) {
        Dense nb(ns, 0.0);
        double total = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            if (b[s] == 0.0) continue;
            for (std::size_t n = 0; n < ns; ++n) {
                const double w = b[s] * m.transition_prob(static_cast<StateId>(s), a, static_cast<StateId>(n)) *
                                 m.observation_prob(static_cast<StateId>(n), static_cast<ObsId>(o));
                nb[n] += w;
                total += w;
            }
        }
        if (total <= 0.0) continue;
        for (double& x : nb) x /= total;
        out.push_back({static_cast<ObsId>(o), total, std::move(nb)});
    }
    return out;
}

inline double dense_reward(const Pomdp& m, const Dense& b, ActionId a) {
    for (std::size_t s = 0; s < b.size(); ++s)
        if (b[s] > 0.0) return m.reward(static_cast<StateId>(s), a);
    return 0.0;
}

/// inf over policies of P(payoff < tau) with `steps` decisions.
inline double brute_min_risk(const Pomdp& m, const Dense& b, int steps, double tau, double pay = 0.0,
                             double disc = 1.0) {
    if (steps == 0) return pay >= tau - 1e-9 ? 0.0 : 1.0;
    double best = 1.0;
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        const auto act = static_cast<ActionId>(a);
        const double np = pay + disc * dense_reward(m, b, act);
        double risk = 0.0;
        for (const auto& sc : successors(m, b, act))
            risk += sc.p * brute_min_risk(m, sc.belief, steps - 1, tau, np, disc * m.discount());
        best = std::min(best, risk);
    }
    return best;
}

inline double brute_value(const Pomdp& m, const Dense& b, int steps) {
    if (steps == 0) return 0.0;
    double best = -1e300;
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        const auto act = static_cast<ActionId>(a);
        double v = dense_reward(m, b, act);
        for (const auto& sc : successors(m, b, act)) v += m.discount() * sc.p * brute_value(m, sc.belief, steps - 1);
        best = std::max(best, v);
    }
    return best;
}

struct Outcome {
    double safe;
    double value;
};

/// (safe probability, value) of every deterministic history-based policy, unpruned.
inline std::vector<Outcome> brute_policies(const Pomdp& m, const Dense& b, int steps, double tau, double pay = 0.0,
                                           double disc = 1.0) {
    if (steps == 0) return {{pay >= tau - 1e-9 ? 1.0 : 0.0, 0.0}};
    std::vector<Outcome> all;
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
        const auto act = static_cast<ActionId>(a);
        const double r = dense_reward(m, b, act);
        std::vector<Outcome> acc{{0.0, disc * r}};
        for (const auto& sc : successors(m, b, act)) {
            const auto sub = brute_policies(m, sc.belief, steps - 1, tau, pay + disc * r, disc * m.discount());
            std::vector<Outcome> next;
            for (const auto& x : acc)
                for (const auto& y : sub) next.push_back({x.safe + sc.p * y.safe, x.value + sc.p * y.value});
            acc = std::move(next);
        }
        all.insert(all.end(), acc.begin(), acc.end());
    }
    return all;
}

inline Dense dense_initial(const Pomdp& m) { return m.initial_belief().dense(m.num_states()); }

// ---------------------------------------------------------------------------
// Tree forcing.

/// Calls f(path) for every positive-probability history of `steps` decisions whose payoff meets thr.
inline void for_each_safe_history(const Pomdp& m, const Belief& root, int steps, double thr,
                                  const std::function<void(const std::vector<PathStep>&)>& f) {
    std::vector<PathStep> path;
    std::function<void(const Belief&, double, double)> rec = [&](const Belief& b, double pay, double disc) {
        if (static_cast<int>(path.size()) == steps) {
            if (meets_threshold(pay, thr)) f(path);
            return;
        }
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            const auto act = static_cast<ActionId>(a);
            const double r = observable_reward(m, b, act);
            for (const auto& em : observation_distribution(m, b, act)) {
                Belief nb = belief_update(m, b, act, em.obs);
                path.push_back({act, em.obs, r, nb.support()[0].state});
                rec(nb, pay + disc * r, disc * m.discount());
                path.pop_back();
            }
        }
    };
    rec(root, 0.0, 1.0);
}

/// Inserts every safe history into the explicit tree.
inline void complete_explicit_tree(ExplicitTree& exp, double thr) {
    const Belief root = exp.node(exp.root()).belief;  // insert() may reallocate the node storage
    for_each_safe_history(exp.model(), root, exp.steps(), thr,
                          [&](const std::vector<PathStep>& p) { exp.insert(p); });
}

/// Every history shorter than `steps` gets a search node with all actions tried and exact Q values.
inline void seed_exact_search(SearchTree& search, const Pomdp& m, const Belief& root, int steps) {
    std::function<void(NodeId, const Belief&, int)> rec = [&](NodeId n, const Belief& b, int left) {
        const auto q = optimal_action_values(m, b, left);
        for (std::size_t a = 0; a < m.num_actions(); ++a)
            search.initialize(n, static_cast<int>(m.num_actions()), static_cast<ActionId>(a), 1, q[a]);
        if (left <= 1) return;
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            const auto act = static_cast<ActionId>(a);
            for (const auto& em : observation_distribution(m, b, act)) {
                NodeId c = search.find_child(n, act, em.obs);
                if (c == kNoNode) c = search.add_child(n, act, em.obs);
                rec(c, belief_update(m, b, act, em.obs), left - 1);
            }
        }
    };
    rec(search.root(), root, steps);
}

inline double binomial_sigma(double p, int n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

}  // namespace fixtures
