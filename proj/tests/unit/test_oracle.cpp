#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../common/fixtures.hpp"
#include "ramcp/bench.hpp"
#include "ramcp/oracle.hpp"

using namespace ramcp;

namespace {

// Fixture optimum mixes b at t with q = 2/3. The absorbing rewards are paid
// from step 2 through step 20, so every branch scales with G = sum 0.5^i;
// with G = 1/2 this is the familiar -10 + 1235 q.
double fixture_rho() {
    double g = 0.0;
    for (int i = 2; i <= 20; ++i) g += std::ldexp(1.0, -i);
    const double q = 2.0 / 3.0;
    return 0.5 * (-50.0 * g) + 0.5 * ((1.0 - q) * 10.0 * g + q * 0.5 * (10000.0 - 100.0) * g);
}

}  // namespace

TEST_CASE("fixture values") {
    const Pomdp m = gen_example1().model;
    const EopgResult r = exact_eopg(m, 1.0, 2.0 / 3.0, 20);
    REQUIRE(r.feasible);
    CHECK(r.value == doctest::Approx(fixture_rho()).epsilon(1e-6));
    CHECK(r.value == doctest::Approx(813.33).epsilon(1e-5));
    CHECK(exact_min_risk(m, 1.0, 20) == doctest::Approx(0.5));
    CHECK(!exact_eopg(m, 1.0, 0.49, 20).feasible);
    const DeterministicResult d = best_deterministic(m, 1.0, 2.0 / 3.0, 20);
    REQUIRE(d.feasible);
    CHECK(d.value == doctest::Approx(-10.0).epsilon(1e-3));
    CHECK(!best_deterministic(m, 1.0, 0.4, 20).feasible);
    CHECK(r.value - d.value > 100.0);
}

TEST_CASE("fixture values on a prebuilt DAG") {
    const Pomdp m = gen_example1().model;
    const HistoryDag dag = build_history_dag(m, m.initial_belief(), 1.0, decision_steps(20));
    const EopgResult r = exact_eopg(dag, 2.0 / 3.0);
    REQUIRE(r.feasible);
    CHECK(std::abs(r.value - fixture_rho()) <= 1e-6);
    CHECK(exact_min_risk(dag) == doctest::Approx(0.5));
}

TEST_CASE("alpha = 1 gives the unconstrained optimum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = static_cast<int>(seed % 4);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        const EopgResult r = exact_eopg(m, tau, 1.0, horizon);
        REQUIRE(r.feasible);
        const double brute = fixtures::brute_value(m, fixtures::dense_initial(m), decision_steps(horizon));
        CHECK(std::abs(r.value - brute) <= 1e-7);
        CHECK(std::abs(unconstrained_value(m, m.initial_belief(), decision_steps(horizon)) - brute) <= 1e-9);
    }
}

TEST_CASE("a threshold below every payoff leaves the problem unconstrained") {
    const Pomdp m = gen_example1().model;
    const EopgResult r = exact_eopg(m, -1e6, 0.0, 6);
    REQUIRE(r.feasible);
    CHECK(r.value == doctest::Approx(unconstrained_value(m, m.initial_belief(), 7)).epsilon(1e-9));
    CHECK(exact_min_risk(m, -1e6, 6) == 0.0);
    CHECK(exact_min_risk(m, 1e6, 6) == 1.0);
    CHECK(!exact_eopg(m, 1e6, 0.5, 6).feasible);
}

TEST_CASE("minimal risk matches brute force") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = static_cast<int>(seed % 4);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        const double brute = fixtures::brute_min_risk(m, fixtures::dense_initial(m), decision_steps(horizon), tau);
        CHECK(std::abs(exact_min_risk(m, tau, horizon) - brute) <= 1e-9);
    }
}

TEST_CASE("best deterministic policy matches exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = static_cast<int>(seed % 3);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        const auto all = fixtures::brute_policies(m, fixtures::dense_initial(m), decision_steps(horizon), tau);
        for (double alpha : {0.0, 0.2, 0.5, 0.9, 1.0}) {
            bool feasible = false;
            double best = -1e300;
            for (const auto& o : all)
                if (o.safe >= 1.0 - alpha - 1e-9) {
                    feasible = true;
                    best = std::max(best, o.value);
                }
            const DeterministicResult d = best_deterministic(m, tau, alpha, horizon);
            CHECK(d.feasible == feasible);
            if (feasible) CHECK(std::abs(d.value - best) <= 1e-7);
        }
    }
}

TEST_CASE("randomized policies are never worse than deterministic ones") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = 1 + static_cast<int>(seed % 3);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        for (double alpha : {0.1, 0.3, 0.6}) {
            const DeterministicResult d = best_deterministic(m, tau, alpha, horizon);
            const EopgResult r = exact_eopg(m, tau, alpha, horizon);
            if (d.feasible) {
                REQUIRE(r.feasible);
                CHECK(r.value >= d.value - 1e-7);
            }
        }
    }
}

TEST_CASE("minimal risk is the smallest feasible alpha") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = 1 + static_cast<int>(seed % 3);
        const double tau = fixtures::random_threshold(seed, m, horizon);
        const HistoryDag dag = build_history_dag(m, m.initial_belief(), tau, decision_steps(horizon));
        const double mr = exact_min_risk(dag);
        double lo = 0.0, hi = 1.0;
        if (exact_eopg(dag, 0.0).feasible) {
            hi = 0.0;
        } else {
            for (int i = 0; i < 40; ++i) {
                const double mid = 0.5 * (lo + hi);
                (exact_eopg(dag, mid).feasible ? hi : lo) = mid;
            }
        }
        CHECK(std::abs(hi - mr) <= 1e-8);
    }
}

TEST_CASE("rho is monotone in alpha and in tau") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const Pomdp m = fixtures::random_tiny_pomdp(seed);
        const int horizon = 2;
        const double tau = fixtures::random_threshold(seed, m, horizon);
        double prev = -1e300;
        bool was_feasible = false;
        for (double alpha : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}) {
            const EopgResult r = exact_eopg(m, tau, alpha, horizon);
            if (was_feasible) REQUIRE(r.feasible);
            if (r.feasible) {
                CHECK(r.value >= prev - 1e-7);
                prev = r.value;
                was_feasible = true;
            }
        }
        const EopgResult lower = exact_eopg(m, tau - 1.0, 0.3, horizon);
        const EopgResult upper = exact_eopg(m, tau, 0.3, horizon);
        if (upper.feasible) {
            REQUIRE(lower.feasible);
            CHECK(lower.value >= upper.value - 1e-7);
        }
        CHECK(exact_min_risk(m, tau - 1.0, horizon) <= exact_min_risk(m, tau, horizon) + 1e-12);
    }
}

TEST_CASE("the root distribution is a distribution") {
    const Pomdp m = gen_example1().model;
    const EopgResult r = exact_eopg(m, 1.0, 0.7, 4);
    REQUIRE(r.feasible);
    REQUIRE(r.root_distribution.size() == 2);
    CHECK(r.root_distribution[0] + r.root_distribution[1] == doctest::Approx(1.0));
}

TEST_CASE("the size guard trips on large histories") {
    const Pomdp m = gen_tiger().model;
    OracleOptions opts;
    opts.max_nodes = 100;
    CHECK_THROWS_AS(exact_eopg(m, 0.0, 0.5, 12, opts), SizeGuardExceeded);
    CHECK_THROWS_AS(build_history_dag(m, m.initial_belief(), 0.0, 13, opts), SizeGuardExceeded);
}
