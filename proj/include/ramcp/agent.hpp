#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ramcp/cmdp.hpp"
#include "ramcp/model.hpp"
#include "ramcp/risk.hpp"
#include "ramcp/sampler.hpp"
#include "ramcp/search.hpp"

namespace ramcp {

/// A search budget: either a simulation count or wall-clock milliseconds.
struct BudgetAmount {
    enum class Unit { Simulations, Milliseconds };
    Unit unit = Unit::Simulations;
    long value = 0;

    static BudgetAmount simulations(long n) { return {Unit::Simulations, n}; }
    static BudgetAmount milliseconds(long ms) { return {Unit::Milliseconds, ms}; }
    /// "250ms", "1000sims" (a bare number means simulations).
    static BudgetAmount parse(const std::string& text);
    bool wall_clock() const { return unit == Unit::Milliseconds; }
    std::string str() const;
};

struct Budget {
    BudgetAmount first;
    BudgetAmount step;

    static Budget simulations(long first, long step) {
        return {BudgetAmount::simulations(first), BudgetAmount::simulations(step)};
    }
    bool wall_clock() const { return first.wall_clock() || step.wall_clock(); }
};

struct PlannerConfig {
    double exploration = std::numeric_limits<double>::quiet_NaN();  // NaN: default constant
    std::size_t particle_cap = kDefaultParticleCap;
    CmdpOptions cmdp;
    SolveOptions solve;
    std::ostream* tree_dump = nullptr;
};

/**
 * RAMCP decision loop state: threshold, risk bound, remaining decisions,
 * both trees and the exact root belief.
 */
class Planner {
public:
    /// `steps` is the number of decisions, i.e. horizon N + 1.
    Planner(const Pomdp& model, double threshold, double alpha, int steps, PlannerConfig config = {});

    /// Runs simulations from the root until the budget is used up.
    void explore(const BudgetAmount& budget, RandomSource& rng);
    long last_simulation_count() const { return last_sims_; }

    ActionDecision select_action();
    static ActionId sample_action(const ActionDecision& decision, RandomSource& rng);

    /// Bookkeeping after the environment answered (o, R) to action a.
    void play(ActionId a, ObsId o, double reward, const ActionDecision& decision);

    double threshold() const { return thr_; }
    double risk_bound() const { return rbound_; }
    int remaining() const { return remaining_; }
    double exploration() const { return K_; }
    const Belief& belief() const { return belief_; }
    const SearchTree& search_tree() const { return search_; }
    const ExplicitTree& explicit_tree() const { return exp_; }
    SearchTree& search_tree() { return search_; }
    ExplicitTree& explicit_tree() { return exp_; }

private:
    const Pomdp* model_;
    PlannerConfig config_;
    double thr_;
    double rbound_;
    int remaining_;
    double K_;
    Belief belief_;
    SearchTree search_;
    ExplicitTree exp_;
    long last_sims_ = 0;
};

/// Simulated environment with a hidden state drawn from the initial belief.
class Environment {
public:
    Environment(const Pomdp& model, RandomSource rng);
    StateId state() const { return state_; }
    StepSample step(ActionId a);

private:
    const Pomdp* model_;
    RandomSource rng_;
    StateId state_;
};

struct TrialSpec {
    double tau = 0.0;
    double alpha = 1.0;
    HorizonSpec horizon = HorizonSpec::fixed(0);
    Budget budget = Budget::simulations(1000, 1000);
};

struct TrialRecord {
    std::uint64_t seed = 0;
    double payoff = 0.0;  // Disc_{gamma,N}
    bool safe = false;
    double first_risk = 1.0;   // root U after the first search phase
    double stated_risk = 1.0;  // max{u, alpha}
    bool infeasible = false;   // u > alpha
    std::vector<DecisionMode> modes;
    std::vector<double> rewards;
    int steps = 0;
    double wall_ms = 0.0;
};

/// Run-length encoding of a mode trace, e.g. "C2R1U18".
std::string encode_modes(const std::vector<DecisionMode>& modes);

/// Full episode against a simulated environment. All randomness derives from `seed`.
TrialRecord run_trial(const Pomdp& model, const TrialSpec& spec, std::uint64_t seed,
                      const PlannerConfig& config = {});

}  // namespace ramcp
