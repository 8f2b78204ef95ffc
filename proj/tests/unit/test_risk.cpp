#include <doctest.h>

#include <random>

#include "../common/fixtures.hpp"
#include "ramcp/risk.hpp"

using namespace ramcp;

namespace {

/// Single action; state k branches to 2k+1 and 2k+2 with probability q and 1-q; identity observations.
Pomdp binary_tree(double q, int depth) {
    const int n = (1 << (depth + 1)) - 1;
    std::vector<std::string> names;
    for (int s = 0; s < n; ++s) names.push_back("s" + std::to_string(s));
    PomdpBuilder b(names, {"a"}, names, 0.9);
    for (int s = 0; s < n; ++s) {
        if (2 * s + 2 < n) {
            b.set_transition(s, 0, 2 * s + 1, q);
            b.set_transition(s, 0, 2 * s + 2, 1.0 - q);
        } else {
            b.set_transition(s, 0, s, 1.0);
        }
        b.set_observation(s, s, 1.0);
    }
    std::vector<double> init(static_cast<std::size_t>(n), 0.0);
    init[0] = 1.0;
    b.set_initial(init);
    return b.build();
}

std::vector<PathStep> path_of(std::initializer_list<int> states) {
    std::vector<PathStep> p;
    for (int s : states) p.push_back({0, s, 0.0, s});
    return p;
}

}  // namespace

TEST_CASE("empty explicit tree has root U = 1") {
    const Pomdp m = binary_tree(0.5, 2);
    ExplicitTree t(m, m.initial_belief(), 2);
    CHECK(t.U(t.root()) == 1.0);
    CHECK(t.recompute_risk() == 1.0);
    CHECK(t.allowed_actions(t.root()).empty());
}

TEST_CASE("one safe history through two halving branches gives U = 0.75") {
    const Pomdp m = binary_tree(0.5, 2);
    ExplicitTree t(m, m.initial_belief(), 2);
    REQUIRE(t.insert(path_of({1, 3})) != kNoNode);
    CHECK(t.U(t.root()) == doctest::Approx(0.75));
    CHECK(t.recompute_risk() == doctest::Approx(0.75));
}

TEST_CASE("two children with U 0 and 1 give U_a = 0.5") {
    const Pomdp m = binary_tree(0.5, 1);
    ExplicitTree t(m, m.initial_belief(), 1);
    t.insert(path_of({1}));
    CHECK(t.U_a(t.root(), 0) == doctest::Approx(0.5));
    CHECK(t.U(t.root()) == doctest::Approx(0.5));
    CHECK(t.has_children(t.root(), 0));
}

TEST_CASE("a single safe leaf with p = 0.3 gives U = 0.7") {
    const Pomdp m = binary_tree(0.3, 1);
    ExplicitTree t(m, m.initial_belief(), 1);
    t.insert(path_of({1}));
    CHECK(t.U(t.root()) == doctest::Approx(0.7));
    const NodeId leaf = t.find_child(t.root(), 0, 1);
    REQUIRE(leaf != kNoNode);
    CHECK(t.node(leaf).p == doctest::Approx(0.3));
    CHECK(t.is_safe_leaf(leaf));
    CHECK(t.U(leaf) == 0.0);
}

TEST_CASE("re-inserting a present history changes nothing") {
    const Pomdp m = binary_tree(0.5, 2);
    ExplicitTree t(m, m.initial_belief(), 2);
    t.insert(path_of({1, 3}));
    const auto before = t.dump();
    CHECK(t.insert(path_of({1, 3})) == kNoNode);
    CHECK(t.dump() == before);
}

TEST_CASE("inserting a history through an impossible observation throws") {
    const Pomdp m = binary_tree(0.5, 2);
    ExplicitTree t(m, m.initial_belief(), 2);
    CHECK_THROWS_AS(t.insert(path_of({1, 5})), BeliefUpdateFailure);
}

TEST_CASE("complete explicit trees reproduce the minimal risk exactly") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = static_cast<int>(seed % 4);
        const int steps = decision_steps(horizon);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        ExplicitTree t(m, m.initial_belief(), steps);
        fixtures::complete_explicit_tree(t, tau);
        const double brute = fixtures::brute_min_risk(m, fixtures::dense_initial(m), steps, tau);
        CHECK(std::abs(t.U(t.root()) - brute) <= 1e-9);
        CHECK(std::abs(t.recompute_risk() - brute) <= 1e-9);
    }
}

TEST_CASE("U is an upper bound that only decreases as histories arrive") {
    for (std::uint64_t seed = 40; seed < 60; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int steps = 3;
        const double tau = fixtures::random_threshold(seed, m, steps - 1);
        std::vector<std::vector<PathStep>> safe;
        fixtures::for_each_safe_history(m, m.initial_belief(), steps, tau,
                                        [&](const std::vector<PathStep>& p) { safe.push_back(p); });
        std::mt19937_64 gen(seed);
        std::shuffle(safe.begin(), safe.end(), gen);
        ExplicitTree t(m, m.initial_belief(), steps);
        const double exact = fixtures::brute_min_risk(m, fixtures::dense_initial(m), steps, tau);
        std::vector<double> prev;
        for (const auto& p : safe) {
            t.insert(p);
            CHECK(exact <= t.U(t.root()) + 1e-12);
            for (std::size_t i = 0; i < prev.size(); ++i) CHECK(t.U(static_cast<NodeId>(i)) <= prev[i] + 1e-15);
            prev.clear();
            for (NodeId n = 0; n < t.size(); ++n) prev.push_back(t.U(n));
        }
        CHECK(std::abs(t.U(t.root()) - exact) <= 1e-9);
    }
}

TEST_CASE("explicit-tree beliefs match iterated updates from the root") {
    const Pomdp m = fixtures::random_tiny_pomdp(77);
    ExplicitTree t(m, m.initial_belief(), 4);
    fixtures::complete_explicit_tree(t, -1e9);
    for (NodeId n = 1; n < t.size(); ++n) {
        std::vector<NodeId> chain;
        for (NodeId g = n; g != t.root(); g = t.node(g).parent) chain.push_back(g);
        Belief b = m.initial_belief();
        for (auto it = chain.rbegin(); it != chain.rend(); ++it)
            b = belief_update(m, b, t.node(*it).action, t.node(*it).obs);
        CHECK(b.approx_equal(t.node(n).belief, 1e-9));
    }
}

TEST_CASE("closure completes observation distributions") {
    SUBCASE("nothing to add when every observation is present") {
        const Pomdp m = binary_tree(0.5, 1);
        ExplicitTree t(m, m.initial_belief(), 1);
        t.insert(path_of({1}));
        t.insert(path_of({2}));
        CHECK(closure(t).frontier_count() == 0);
    }
    SUBCASE("a missing sibling becomes a frontier node") {
        const Pomdp m = binary_tree(0.5, 1);
        ExplicitTree t(m, m.initial_belief(), 1);
        t.insert(path_of({1}));
        const ClosureTree c = closure(t);
        CHECK(c.frontier_count() == 1);
        const auto br = c.branches_of(t.root());
        REQUIRE(br.size() == 1);
        const auto edges = c.edges_of(br[0]);
        REQUIRE(edges.size() == 2);
        CHECK(edges[1].obs == 2);
        CHECK(edges[1].child == kNoNode);
        CHECK(edges[1].p == doctest::Approx(0.5));
    }
    SUBCASE("per-branch probabilities sum to one on random models") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Pomdp m = fixtures::random_tiny_pomdp(seed);
            const int steps = 3;
            ExplicitTree t(m, m.initial_belief(), steps);
            fixtures::complete_explicit_tree(t, fixtures::random_threshold(seed, m, steps - 1));
            const ClosureTree c = closure(t);
            for (NodeId n = 0; n < t.size(); ++n) {
                for (const auto& br : c.branches_of(n)) {
                    double total = 0.0;
                    for (const auto& e : c.edges_of(br)) total += e.p;
                    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
                    double from_model = 0.0;
                    for (ObsId o = 0; o < 2; ++o) from_model += obs_probability(m, t.node(n).belief, br.action, o);
                    CHECK(from_model == doctest::Approx(total).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("pruning the explicit tree") {
    const Pomdp m = binary_tree(0.5, 2);
    SUBCASE("present child keeps its subtree and U") {
        ExplicitTree t(m, m.initial_belief(), 2);
        t.insert(path_of({1, 3}));
        const NodeId c = t.find_child(t.root(), 0, 1);
        const double uc = t.U(c);
        t.prune_to(0, 1, t.node(c).belief);
        CHECK(t.steps() == 1);
        CHECK(t.U(t.root()) == doctest::Approx(uc));
        CHECK(t.recompute_risk() == doctest::Approx(uc));
        CHECK(t.size() == 2);
    }
    SUBCASE("absent child yields an empty tree with U = 1") {
        ExplicitTree t(m, m.initial_belief(), 2);
        t.insert(path_of({1, 3}));
        t.prune_to(0, 2, Belief::point(2));
        CHECK(t.size() == 1);
        CHECK(t.U(t.root()) == 1.0);
    }
}

TEST_CASE("update_trees seeds missing search prefixes with the discounted suffix") {
    const Pomdp m = binary_tree(0.5, 2);
    ExplicitTree t(m, m.initial_belief(), 3);
    SearchTree s(1);
    RandomSource rng(1);
    const std::vector<PathStep> path{{0, 1, 2.0, 1}, {0, 3, 4.0, 3}, {0, 3, 8.0, 3}};
    update_trees(t, s, path, 0.5, rng);
    CHECK(t.size() == 4);
    const NodeId c1 = s.find_child(s.root(), 0, 1);
    REQUIRE(c1 != kNoNode);
    CHECK(s.visits(c1) == 1);
    CHECK(s.action_visits(c1, 0) == 1);
    CHECK(s.value(c1, 0) == doctest::Approx(4.0 + 0.5 * 8.0));
    const NodeId c2 = s.find_child(c1, 0, 3);
    REQUIRE(c2 != kNoNode);
    CHECK(s.value(c2, 0) == doctest::Approx(8.0));
    CHECK(s.find_child(c2, 0, 3) == kNoNode);  // full-length histories are not search nodes
    CHECK(s.node(c2).particles.size() == 1);
}

TEST_CASE("unobservable rewards are rejected when computing edge rewards") {
    PomdpBuilder b({"x", "y"}, {"a"}, {"o"}, 0.9);
    b.set_transition(0, 0, 0, 1.0).set_transition(1, 0, 1, 1.0);
    b.set_observation(0, 0, 1.0).set_observation(1, 0, 1.0);
    b.set_reward(1, 0, 1.0).set_initial({0.5, 0.5});
    const Pomdp m = b.build();
    CHECK_THROWS_AS(observable_reward(m, m.initial_belief(), 0), ModelError);
}
