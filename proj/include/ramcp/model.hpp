#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ramcp {

using StateId = int;
using ActionId = int;
using ObsId = int;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Absolute tolerance for row-sum and reward-equality checks.
inline constexpr double kStochasticTolerance = 1e-9;
/// Normalizers at or below this are treated as zero-probability events.
inline constexpr double kZeroNormalizer = 1e-12;
/// Slack applied whenever a payoff is compared against a threshold.
inline constexpr double kThresholdTolerance = 1e-9;

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroProbabilityObservation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientLength : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Transition {
    StateId next;
    double prob;
};

struct Emission {
    ObsId obs;
    double prob;
};

/**
 * Sparse probability distribution over states.
 *
 * Entries are kept sorted by state id and only strictly positive weights are
 * stored, so iteration visits exactly the support.
 */
class Belief {
public:
    struct Entry {
        StateId state;
        double weight;
    };

    Belief() = default;
    /// Takes ownership of entries; sorts them and drops non-positive weights.
    explicit Belief(std::vector<Entry> entries);

    static Belief point(StateId s);
    static Belief from_dense(std::span<const double> weights);

    double operator[](StateId s) const;
    std::span<const Entry> support() const { return entries_; }
    std::size_t support_size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    double total() const;
    std::vector<double> dense(std::size_t num_states) const;

    bool approx_equal(const Belief& other, double tol) const;
    friend bool operator==(const Belief& a, const Belief& b);

private:
    std::vector<Entry> entries_;
};

struct HistoryStep {
    ActionId action;
    ObsId observation;
    friend bool operator==(const HistoryStep&, const HistoryStep&) = default;
};

using History = std::vector<HistoryStep>;

class PomdpBuilder;

/**
 * Finite POMDP with state-dependent observations and sparse rows.
 *
 * Immutable once built. Sampling-friendly: transition and emission rows are
 * stored as contiguous (target, probability) lists in insertion order of
 * increasing target id.
 */
class Pomdp {
public:
    std::size_t num_states() const { return state_names_.size(); }
    std::size_t num_actions() const { return action_names_.size(); }
    std::size_t num_observations() const { return obs_names_.size(); }

    const std::vector<std::string>& state_names() const { return state_names_; }
    const std::vector<std::string>& action_names() const { return action_names_; }
    const std::vector<std::string>& observation_names() const { return obs_names_; }

    double discount() const { return discount_; }

    std::span<const Transition> transitions(StateId s, ActionId a) const;
    std::span<const Emission> emissions(StateId s) const;
    double transition_prob(StateId s, ActionId a, StateId next) const;
    double observation_prob(StateId s, ObsId o) const;
    double reward(StateId s, ActionId a) const {
        return rewards_[static_cast<std::size_t>(s) * num_actions() + static_cast<std::size_t>(a)];
    }
    const Belief& initial_belief() const { return initial_; }

    double min_reward() const { return min_reward_; }
    double max_reward() const { return max_reward_; }

    StateId state_index(const std::string& name) const;
    ActionId action_index(const std::string& name) const;
    ObsId observation_index(const std::string& name) const;

private:
    friend class PomdpBuilder;
    Pomdp() = default;

    std::vector<std::string> state_names_;
    std::vector<std::string> action_names_;
    std::vector<std::string> obs_names_;
    double discount_ = 0.0;

    std::vector<std::size_t> trans_offsets_;  // (s,a) -> range into trans_
    std::vector<Transition> trans_;
    std::vector<std::size_t> emit_offsets_;   // s -> range into emit_
    std::vector<Emission> emit_;
    std::vector<double> rewards_;
    Belief initial_;
    double min_reward_ = 0.0;
    double max_reward_ = 0.0;
};

class PomdpBuilder {
public:
    PomdpBuilder(std::vector<std::string> states, std::vector<std::string> actions,
                 std::vector<std::string> observations, double discount);

    PomdpBuilder& set_transition(StateId s, ActionId a, StateId next, double prob);
    PomdpBuilder& set_observation(StateId s, ObsId o, double prob);
    PomdpBuilder& set_reward(StateId s, ActionId a, double r);
    PomdpBuilder& set_initial(std::vector<double> weights);

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_actions() const { return actions_.size(); }
    std::size_t num_observations() const { return observations_.size(); }

    /// Builds without validating; call validate() on the result.
    Pomdp build() const;

private:
    std::vector<std::string> states_, actions_, observations_;
    double discount_;
    std::vector<std::vector<std::pair<StateId, double>>> trans_;  // (s,a)
    std::vector<std::vector<std::pair<ObsId, double>>> obs_;      // s
    std::vector<double> rewards_;
    std::vector<double> initial_;
};

struct Violation {
    enum class Kind {
        Discount,
        NegativeProbability,
        TransitionRow,
        ObservationRow,
        InitialBelief,
        ObservableRewards,
    };
    Kind kind;
    std::string location;
    std::string message;
};

std::string to_string(Violation::Kind kind);

/// Every violated model invariant; empty means valid.
std::vector<Violation> validate(const Pomdp& model);

/// Throws ModelError listing every violation if the model is invalid.
void require_valid(const Pomdp& model);

/// Predicted next-state distribution sum_s b(s) T(.|s,a) (unnormalized support only).
Belief predict(const Pomdp& model, const Belief& b, ActionId a);

double obs_probability(const Pomdp& model, const Belief& b, ActionId a, ObsId o);

/// Positive-probability observations after playing a from b, sorted by id.
std::vector<Emission> observation_distribution(const Pomdp& model, const Belief& b, ActionId a);

Belief belief_update(const Pomdp& model, const Belief& b, ActionId a, ObsId o);

/// Bayesian update that also reports the normalizer P(o | b, a).
std::pair<Belief, double> belief_update_with_prob(const Pomdp& model, const Belief& b,
                                                  ActionId a, ObsId o);

/// Sum_{i=0..N} gamma^i r_i. Needs at least N+1 rewards.
double discounted_payoff(std::span<const double> rewards, double gamma, int horizon);

/// Infinite sum over the whole sequence.
double discounted_sum(std::span<const double> rewards, double gamma);

/// Smallest N with gamma^N * spread <= (1 - gamma) * epsilon / 2.
int horizon_for_epsilon(double gamma, double spread, double epsilon);
int horizon_for_epsilon(const Pomdp& model, double epsilon);

/// |max{0, r_max} - min{0, r_min}|
double payoff_spread(const Pomdp& model);

double shift_threshold(double tau, double reward, double gamma);

inline bool meets_threshold(double payoff, double threshold) {
    return payoff >= threshold - kThresholdTolerance;
}

/// Disc_{gamma,N} sums N+1 rewards, so a horizon of N means N+1 decisions.
inline int decision_steps(int horizon) { return horizon + 1; }

/// Either a fixed horizon N or an error term epsilon resolved through N(epsilon).
class HorizonSpec {
public:
    static HorizonSpec fixed(int horizon);
    static HorizonSpec from_epsilon(double epsilon);

    bool is_fixed() const { return std::holds_alternative<int>(value_); }
    int resolve(const Pomdp& model) const;
    /// Amount subtracted from the threshold (epsilon/2 in epsilon mode, else 0).
    double threshold_slack() const;

private:
    explicit HorizonSpec(std::variant<int, double> v) : value_(v) {}
    std::variant<int, double> value_;
};

}  // namespace ramcp
