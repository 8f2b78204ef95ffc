#include <doctest.h>

#include "ramcp/bench.hpp"
#include "ramcp/model_io.hpp"
#include "ramcp/oracle.hpp"

using namespace ramcp;

TEST_CASE("every built-in benchmark validates") {
    for (const auto& name : bench_names()) {
        const GeneratedModel g = make_bench(name);
        CHECK(validate(g.model).empty());
        CHECK(g.model.num_states() == g.num_states);
    }
    CHECK_THROWS(make_bench("nope"));
}

TEST_CASE("generators are pure") {
    CHECK(model_to_string(gen_tiger().model) == model_to_string(gen_tiger().model));
    CHECK(model_to_string(make_bench("hallway3").model) == model_to_string(make_bench("hallway3").model));
}

TEST_CASE("Tiger has the classic listening accuracy and payoffs") {
    const Pomdp m = gen_tiger().model;
    CHECK(m.num_states() == 6);
    CHECK(m.observation_prob(m.state_index("tiger-left-heard"), m.observation_index("hear-left")) == 0.85);
    CHECK(m.reward(m.state_index("tiger-left"), m.action_index("listen")) == -1.0);
    CHECK(m.reward(m.state_index("good"), 0) == 10.0);
    CHECK(m.reward(m.state_index("bad"), 0) == -100.0);
    CHECK(horizon_for_epsilon(m, 1.0) == 164);
}

TEST_CASE("Tiger unconstrained value agrees with the oracle at alpha = 1") {
    const Pomdp m = gen_tiger().model;
    const EopgResult r = exact_eopg(m, 0.0, 1.0, 4);
    REQUIRE(r.feasible);
    CHECK(r.value == doctest::Approx(unconstrained_value(m, m.initial_belief(), 5)).epsilon(1e-9));
}

TEST_CASE("example1 structure") {
    const Pomdp m = gen_example1().model;
    const StateId x = m.state_index("x"), y = m.state_index("y");
    const ActionId b = m.action_index("b");
    const Belief two = predict(m, predict(m, m.initial_belief(), b), b);
    CHECK(two[x] == doctest::Approx(0.25));
    // always playing b fails on x and on y
    CHECK(two[x] + two[y] == doctest::Approx(0.75));
    CHECK(m.discount() == 0.5);
}

TEST_CASE("a corridor without tasks pays nothing") {
    HallwaySpec spec;
    spec.map = {"S.."};
    const Pomdp m = gen_hallway(spec, false).model;
    CHECK(m.min_reward() == 0.0);
    CHECK(m.max_reward() == 0.0);
    CHECK(m.num_states() == 3 * 4);
}

TEST_CASE("3x3 maze: the task can be reached, a walled-off task cannot") {
    const Pomdp open = gen_hallway(hallway_3x3(), false).model;
    CHECK(exact_min_risk(open, 1.0, 6) == doctest::Approx(0.5));
    HallwaySpec walled;
    walled.map = {"S#1", "##.", "..."};
    walled.tasks[1] = TaskParams{10.0, -10.0, 0.5};
    const Pomdp closed = gen_hallway(walled, false).model;
    CHECK(exact_min_risk(closed, 1.0, 6) == 1.0);
}

TEST_CASE("the fully observable maze has one observation per state") {
    const Pomdp m = make_bench("hallway3-mdp").model;
    CHECK(m.num_observations() == m.num_states());
}

TEST_CASE("hallway specs parse and report problems") {
    const HallwaySpec spec = parse_hallway_spec("S.1\n.T.\n\ntask 1 5 -2 0.7\ntrap 0 1 0 0\ndiscount 0.9\n");
    CHECK(spec.map.size() == 2);
    CHECK(spec.tasks.at(1).reward == 5.0);
    CHECK(spec.tasks.at(1).p_good == 0.7);
    CHECK(spec.trap_spin[1] == 1.0);
    CHECK(spec.discount == 0.9);
    CHECK(spec.problems().empty());
    CHECK_THROWS_AS(parse_hallway_spec("S.\ntask 1 x\n"), ModelError);

    HallwaySpec bad;
    bad.map = {"..", "..."};
    const auto p = bad.problems();
    CHECK(p.size() == 2);  // ragged row, no start
    bad.map = {"S?"};
    CHECK(!bad.problems().empty());
    CHECK_THROWS_AS(gen_hallway(bad, false), ModelError);
    CHECK_THROWS_AS(load_hallway_spec("/nonexistent/maze.txt"), ModelError);
}

TEST_CASE("a trap spins the heading") {
    HallwaySpec spec = parse_hallway_spec("ST.\ntrap 0 0 1 0\n");
    const Pomdp m = gen_hallway(spec, true).model;
    // facing east from the start, the trap turns us around to face west
    const StateId from = m.state_index("r0c0Em0o0");
    CHECK(m.transition_prob(from, m.action_index("forward"), m.state_index("r0c1Wm0o0")) == 1.0);
}
