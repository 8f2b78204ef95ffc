#include "ramcp/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "ramcp/simulate.hpp"

namespace ramcp {

BudgetAmount BudgetAmount::parse(const std::string& text) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(text, &used);
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad budget '" + text + "'");
    }
    const std::string unit = text.substr(used);
    if (value < 0) throw std::invalid_argument("budget must be nonnegative: '" + text + "'");
    if (unit.empty() || unit == "sims" || unit == "sim") return simulations(value);
    if (unit == "ms") return milliseconds(value);
    throw std::invalid_argument("bad budget unit in '" + text + "' (use ms or sims)");
}

std::string BudgetAmount::str() const {
    return std::to_string(value) + (wall_clock() ? "ms" : "sims");
}

Planner::Planner(const Pomdp& model, double threshold, double alpha, int steps, PlannerConfig config)
    : model_(&model),
      config_(config),
      thr_(threshold),
      rbound_(alpha),
      remaining_(steps),
      K_(std::isnan(config.exploration) ? default_exploration_constant(model, steps - 1) : config.exploration),
      belief_(model.initial_belief()),
      search_(model.num_actions(), config.particle_cap),
      exp_(model, model.initial_belief(), steps) {
    if (steps < 0) throw std::invalid_argument("planner needs a nonnegative number of steps");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("risk bound alpha must lie in [0,1]");
}

void Planner::explore(const BudgetAmount& budget, RandomSource& rng) {
    last_sims_ = 0;
    if (remaining_ <= 0) return;
    SimContext ctx(*model_, search_, exp_, rng, thr_, K_);
    if (!budget.wall_clock()) {
        run_simulations(ctx, belief_, remaining_, budget.value);
        last_sims_ = budget.value;
        return;
    }
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(budget.value);
    while (clock::now() < deadline) {
        run_simulations(ctx, belief_, remaining_, 16);
        last_sims_ += 16;
    }
}

ActionDecision Planner::select_action() {
    const std::size_t nz = model_->num_observations();
    const double u = exp_.U(exp_.root());
    ActionDecision d;
    if (rbound_ >= 1.0) {
        d = unconstrained_decision(search_, nz);
    } else if (u <= rbound_ + kThresholdTolerance) {
        const ClosureTree cl = closure(exp_);
        const ConstrainedTreeMdp m = build_cmdp(cl, search_, config_.cmdp);
        d = solve_decision(m, exp_, std::min(1.0, std::max(rbound_, u)), config_.solve);
    } else {
        d = risk_min_fallback(exp_, search_, nz);
    }
    if (config_.tree_dump) {
        *config_.tree_dump << "step with " << remaining_ << " decisions left, thr=" << thr_ << " rbound=" << rbound_
                           << " mode=" << mode_letter(d.mode) << '\n'
                           << exp_.dump();
    }
    return d;
}

ActionId Planner::sample_action(const ActionDecision& decision, RandomSource& rng) {
    const auto& p = decision.d_pi;
    std::size_t support = 0, last = 0;
    for (std::size_t a = 0; a < p.size(); ++a)
        if (p[a] > 0.0) {
            ++support;
            last = a;
        }
    if (support == 1) return static_cast<ActionId>(last);
    return static_cast<ActionId>(sample_index(std::span<const double>(p), [](double w) { return w; }, rng));
}

void Planner::play(ActionId a, ObsId o, double reward, const ActionDecision& decision) {
    if (remaining_ <= 0) throw std::logic_error("no decisions left to play");
    thr_ = shift_threshold(thr_, reward, model_->discount());
    rbound_ = decision.risk[static_cast<std::size_t>(a)][static_cast<std::size_t>(o)];
    belief_ = belief_update(*model_, belief_, a, o);
    search_.prune_to(a, o);
    exp_.prune_to(a, o, belief_);
    remaining_ -= 1;
}

Environment::Environment(const Pomdp& model, RandomSource rng)
    : model_(&model), rng_(rng), state_(sample_state(model.initial_belief(), rng_)) {}

StepSample Environment::step(ActionId a) {
    const StepSample s = sample_step(*model_, state_, a, rng_);
    state_ = s.next;
    return s;
}

std::string encode_modes(const std::vector<DecisionMode>& modes) {
    std::string out;
    for (std::size_t i = 0; i < modes.size();) {
        std::size_t j = i;
        while (j < modes.size() && modes[j] == modes[i]) ++j;
        out += mode_letter(modes[i]);
        out += std::to_string(j - i);
        i = j;
    }
    return out;
}

TrialRecord run_trial(const Pomdp& model, const TrialSpec& spec, std::uint64_t seed, const PlannerConfig& config) {
    require_valid(model);
    if (!(model.discount() > 0.0))
        throw ModelError("planning needs a positive discount (thresholds are rescaled by 1/gamma)");
    const auto start = std::chrono::steady_clock::now();
    const int horizon = spec.horizon.resolve(model);
    const int steps = decision_steps(horizon);
    const double threshold = spec.tau - spec.horizon.threshold_slack();

    const RandomSource base(seed);
    Environment env(model, base.derive(0));
    Planner planner(model, threshold, spec.alpha, steps, config);

    TrialRecord rec;
    rec.seed = seed;
    for (int k = 0; k < steps; ++k) {
        RandomSource search_rng = base.derive(1, static_cast<std::uint64_t>(k));
        RandomSource action_rng = base.derive(2, static_cast<std::uint64_t>(k));
        planner.explore(k == 0 ? spec.budget.first : spec.budget.step, search_rng);
        if (k == 0) {
            rec.first_risk = planner.explicit_tree().U(planner.explicit_tree().root());
            rec.stated_risk = std::max(rec.first_risk, spec.alpha);
            rec.infeasible = rec.first_risk > spec.alpha + kThresholdTolerance;
        }
        const ActionDecision d = planner.select_action();
        const ActionId a = Planner::sample_action(d, action_rng);
        const StepSample out = env.step(a);
        rec.modes.push_back(d.mode);
        rec.rewards.push_back(out.reward);
        planner.play(a, out.obs, out.reward, d);
    }
    rec.steps = steps;
    rec.payoff = discounted_payoff(rec.rewards, model.discount(), horizon);
    rec.safe = meets_threshold(rec.payoff, threshold);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}  // namespace ramcp
