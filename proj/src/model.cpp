#include "ramcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ramcp {

// ---------------------------------------------------------------------------
// Belief

Belief::Belief(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.state < b.state; });
    // merge duplicates, drop non-positive
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().state == e.state) {
            merged.back().weight += e.weight;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [](const Entry& e) { return !(e.weight > 0.0); });
    entries_ = std::move(merged);
}

Belief Belief::point(StateId s) { return Belief({{s, 1.0}}); }

Belief Belief::from_dense(std::span<const double> weights) {
    std::vector<Entry> entries;
    for (std::size_t s = 0; s < weights.size(); ++s) {
        if (weights[s] > 0.0) entries.push_back({static_cast<StateId>(s), weights[s]});
    }
    Belief b;
    b.entries_ = std::move(entries);
    return b;
}

double Belief::operator[](StateId s) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, StateId v) { return e.state < v; });
    return (it != entries_.end() && it->state == s) ? it->weight : 0.0;
}

double Belief::total() const {
    double t = 0.0;
    for (const auto& e : entries_) t += e.weight;
    return t;
}

std::vector<double> Belief::dense(std::size_t num_states) const {
    std::vector<double> out(num_states, 0.0);
    for (const auto& e : entries_) out[static_cast<std::size_t>(e.state)] = e.weight;
    return out;
}

bool Belief::approx_equal(const Belief& other, double tol) const {
    std::size_t i = 0, j = 0;
    while (i < entries_.size() || j < other.entries_.size()) {
        if (j == other.entries_.size() ||
            (i < entries_.size() && entries_[i].state < other.entries_[j].state)) {
            if (entries_[i].weight > tol) return false;
            ++i;
        } else if (i == entries_.size() || other.entries_[j].state < entries_[i].state) {
            if (other.entries_[j].weight > tol) return false;
            ++j;
        } else {
            if (std::abs(entries_[i].weight - other.entries_[j].weight) > tol) return false;
            ++i;
            ++j;
        }
    }
    return true;
}

bool operator==(const Belief& a, const Belief& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
        if (a.entries_[i].state != b.entries_[i].state ||
            a.entries_[i].weight != b.entries_[i].weight)
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Pomdp

std::span<const Transition> Pomdp::transitions(StateId s, ActionId a) const {
    const std::size_t k = static_cast<std::size_t>(s) * num_actions() + static_cast<std::size_t>(a);
    return {trans_.data() + trans_offsets_[k], trans_offsets_[k + 1] - trans_offsets_[k]};
}

std::span<const Emission> Pomdp::emissions(StateId s) const {
    const auto k = static_cast<std::size_t>(s);
    return {emit_.data() + emit_offsets_[k], emit_offsets_[k + 1] - emit_offsets_[k]};
}

double Pomdp::transition_prob(StateId s, ActionId a, StateId next) const {
    for (const auto& t : transitions(s, a))
        if (t.next == next) return t.prob;
    return 0.0;
}

double Pomdp::observation_prob(StateId s, ObsId o) const {
    for (const auto& e : emissions(s))
        if (e.obs == o) return e.prob;
    return 0.0;
}

namespace {
template <typename Names>
int find_name(const Names& names, const std::string& name, const char* what) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ModelError(std::string("unknown ") + what + " '" + name + "'");
    return static_cast<int>(it - names.begin());
}
}  // namespace

StateId Pomdp::state_index(const std::string& name) const {
    return find_name(state_names_, name, "state");
}
ActionId Pomdp::action_index(const std::string& name) const {
    return find_name(action_names_, name, "action");
}
ObsId Pomdp::observation_index(const std::string& name) const {
    return find_name(obs_names_, name, "observation");
}

PomdpBuilder::PomdpBuilder(std::vector<std::string> states, std::vector<std::string> actions,
                           std::vector<std::string> observations, double discount)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      observations_(std::move(observations)),
      discount_(discount),
      trans_(states_.size() * actions_.size()),
      obs_(states_.size()),
      rewards_(states_.size() * actions_.size(), 0.0),
      initial_(states_.size(), 0.0) {
    if (states_.empty() || actions_.empty() || observations_.empty())
        throw ModelError("model needs at least one state, action and observation");
}

namespace {
template <typename Id>
void put(std::vector<std::pair<Id, double>>& row, Id key, double value) {
    for (auto& [k, v] : row) {
        if (k == key) {
            v = value;
            return;
        }
    }
    row.emplace_back(key, value);
}

void check_index(int idx, std::size_t n, const char* what) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n)
        throw ModelError(std::string(what) + " index out of range: " + std::to_string(idx));
}
}  // namespace

PomdpBuilder& PomdpBuilder::set_transition(StateId s, ActionId a, StateId next, double prob) {
    check_index(s, states_.size(), "state");
    check_index(a, actions_.size(), "action");
    check_index(next, states_.size(), "state");
    put(trans_[static_cast<std::size_t>(s) * actions_.size() + static_cast<std::size_t>(a)], next, prob);
    return *this;
}

PomdpBuilder& PomdpBuilder::set_observation(StateId s, ObsId o, double prob) {
    check_index(s, states_.size(), "state");
    check_index(o, observations_.size(), "observation");
    put(obs_[static_cast<std::size_t>(s)], o, prob);
    return *this;
}

PomdpBuilder& PomdpBuilder::set_reward(StateId s, ActionId a, double r) {
    check_index(s, states_.size(), "state");
    check_index(a, actions_.size(), "action");
    rewards_[static_cast<std::size_t>(s) * actions_.size() + static_cast<std::size_t>(a)] = r;
    return *this;
}

PomdpBuilder& PomdpBuilder::set_initial(std::vector<double> weights) {
    if (weights.size() != states_.size())
        throw ModelError("initial belief has " + std::to_string(weights.size()) +
                         " entries, expected " + std::to_string(states_.size()));
    initial_ = std::move(weights);
    return *this;
}

Pomdp PomdpBuilder::build() const {
    Pomdp m;
    m.state_names_ = states_;
    m.action_names_ = actions_;
    m.obs_names_ = observations_;
    m.discount_ = discount_;

    m.trans_offsets_.reserve(trans_.size() + 1);
    m.trans_offsets_.push_back(0);
    for (auto row : trans_) {
        std::sort(row.begin(), row.end());
        for (const auto& [next, p] : row)
            if (p != 0.0) m.trans_.push_back({next, p});
        m.trans_offsets_.push_back(m.trans_.size());
    }
    m.emit_offsets_.reserve(obs_.size() + 1);
    m.emit_offsets_.push_back(0);
    for (auto row : obs_) {
        std::sort(row.begin(), row.end());
        for (const auto& [o, p] : row)
            if (p != 0.0) m.emit_.push_back({o, p});
        m.emit_offsets_.push_back(m.emit_.size());
    }
    m.rewards_ = rewards_;
    m.initial_ = Belief::from_dense(initial_);
    m.min_reward_ = *std::min_element(rewards_.begin(), rewards_.end());
    m.max_reward_ = *std::max_element(rewards_.begin(), rewards_.end());
    return m;
}

// ---------------------------------------------------------------------------
// Validation

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::Discount: return "discount";
        case Violation::Kind::NegativeProbability: return "negative-probability";
        case Violation::Kind::TransitionRow: return "transition-row";
        case Violation::Kind::ObservationRow: return "observation-row";
        case Violation::Kind::InitialBelief: return "initial-belief";
        case Violation::Kind::ObservableRewards: return "observable-rewards";
    }
    return "unknown";
}

namespace {

bool same_emissions(std::span<const Emission> a, std::span<const Emission> b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].obs < b[j].obs)) {
            if (std::abs(a[i].prob) > kStochasticTolerance) return false;
            ++i;
        } else if (i == a.size() || b[j].obs < a[i].obs) {
            if (std::abs(b[j].prob) > kStochasticTolerance) return false;
            ++j;
        } else {
            if (std::abs(a[i].prob - b[j].prob) > kStochasticTolerance) return false;
            ++i;
            ++j;
        }
    }
    return true;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::vector<Violation> validate(const Pomdp& model) {
    std::vector<Violation> out;
    const auto& sn = model.state_names();
    const auto& an = model.action_names();

    if (!(model.discount() >= 0.0 && model.discount() < 1.0)) {
        out.push_back({Violation::Kind::Discount, "discount",
                       "discount " + fmt(model.discount()) + " outside [0,1)"});
    }

    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            double sum = 0.0;
            bool negative = false;
            for (const auto& t : model.transitions(static_cast<StateId>(s), static_cast<ActionId>(a))) {
                sum += t.prob;
                negative |= t.prob < 0.0;
            }
            const std::string where = "T(" + an[a] + ", " + sn[s] + ")";
            if (negative)
                out.push_back({Violation::Kind::NegativeProbability, where, "negative transition probability"});
            if (std::abs(sum - 1.0) > kStochasticTolerance)
                out.push_back({Violation::Kind::TransitionRow, where,
                               "transition row sums to " + fmt(sum)});
        }
        double sum = 0.0;
        bool negative = false;
        for (const auto& e : model.emissions(static_cast<StateId>(s))) {
            sum += e.prob;
            negative |= e.prob < 0.0;
        }
        const std::string where = "O(" + sn[s] + ")";
        if (negative)
            out.push_back({Violation::Kind::NegativeProbability, where, "negative observation probability"});
        if (std::abs(sum - 1.0) > kStochasticTolerance)
            out.push_back({Violation::Kind::ObservationRow, where,
                           "observation row sums to " + fmt(sum)});
    }

    const double init_sum = model.initial_belief().total();
    if (std::abs(init_sum - 1.0) > kStochasticTolerance)
        out.push_back({Violation::Kind::InitialBelief, "start",
                       "initial belief sums to " + fmt(init_sum)});

    auto rewards_differ = [&](std::size_t s, std::size_t t) -> int {
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            if (std::abs(model.reward(static_cast<StateId>(s), static_cast<ActionId>(a)) -
                         model.reward(static_cast<StateId>(t), static_cast<ActionId>(a))) >
                kStochasticTolerance)
                return static_cast<int>(a);
        }
        return -1;
    };

    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t t = s + 1; t < model.num_states(); ++t) {
            const bool both_initial = model.initial_belief()[static_cast<StateId>(s)] > 0.0 &&
                                      model.initial_belief()[static_cast<StateId>(t)] > 0.0;
            if (!both_initial &&
                !same_emissions(model.emissions(static_cast<StateId>(s)),
                                model.emissions(static_cast<StateId>(t))))
                continue;
            const int a = rewards_differ(s, t);
            if (a >= 0) {
                out.push_back({Violation::Kind::ObservableRewards,
                               "R(" + sn[s] + "|" + sn[t] + ", " + an[static_cast<std::size_t>(a)] + ")",
                               std::string(both_initial ? "states share the initial support"
                                                        : "states share an observation row") +
                                   " but rewards differ; unobservable rewards are not supported"});
            }
        }
    }
    return out;
}

void require_valid(const Pomdp& model) {
    const auto violations = validate(model);
    if (violations.empty()) return;
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += "\n  [" + to_string(v.kind) + "] " + v.location + ": " + v.message;
    throw ModelError(msg);
}

// ---------------------------------------------------------------------------
// Belief arithmetic

namespace {

// Dense scratch reused across calls on the same thread.
struct Scratch {
    std::vector<double> weight;
    std::vector<StateId> touched;

    void reset(std::size_t n) {
        if (weight.size() < n) weight.assign(n, 0.0);
        for (StateId s : touched) weight[static_cast<std::size_t>(s)] = 0.0;
        touched.clear();
    }
    void add(StateId s, double w) {
        double& slot = weight[static_cast<std::size_t>(s)];
        if (slot == 0.0) touched.push_back(s);
        slot += w;
    }
};

Scratch& scratch() {
    thread_local Scratch sc;
    return sc;
}

}  // namespace

Belief predict(const Pomdp& model, const Belief& b, ActionId a) {
    auto& sc = scratch();
    sc.reset(model.num_states());
    for (const auto& e : b.support())
        for (const auto& t : model.transitions(e.state, a)) sc.add(t.next, e.weight * t.prob);
    std::vector<Belief::Entry> entries;
    entries.reserve(sc.touched.size());
    for (StateId s : sc.touched) entries.push_back({s, sc.weight[static_cast<std::size_t>(s)]});
    return Belief(std::move(entries));
}

double obs_probability(const Pomdp& model, const Belief& b, ActionId a, ObsId o) {
    double p = 0.0;
    for (const auto& e : b.support())
        for (const auto& t : model.transitions(e.state, a))
            p += e.weight * t.prob * model.observation_prob(t.next, o);
    return p;
}

std::vector<Emission> observation_distribution(const Pomdp& model, const Belief& b, ActionId a) {
    const Belief next = predict(model, b, a);
    std::vector<Emission> out;
    for (const auto& e : next.support()) {
        for (const auto& em : model.emissions(e.state)) {
            auto it = std::lower_bound(out.begin(), out.end(), em.obs,
                                       [](const Emission& x, ObsId v) { return x.obs < v; });
            if (it != out.end() && it->obs == em.obs)
                it->prob += e.weight * em.prob;
            else
                out.insert(it, {em.obs, e.weight * em.prob});
        }
    }
    std::erase_if(out, [](const Emission& e) { return !(e.prob > 0.0); });
    return out;
}

std::pair<Belief, double> belief_update_with_prob(const Pomdp& model, const Belief& b,
                                                  ActionId a, ObsId o) {
    const Belief next = predict(model, b, a);
    std::vector<Belief::Entry> entries;
    entries.reserve(next.support_size());
    double norm = 0.0;
    for (const auto& e : next.support()) {
        const double w = e.weight * model.observation_prob(e.state, o);
        if (w > 0.0) {
            entries.push_back({e.state, w});
            norm += w;
        }
    }
    if (norm <= kZeroNormalizer) {
        throw ZeroProbabilityObservation("observation '" + model.observation_names()[static_cast<std::size_t>(o)] +
                                         "' has zero probability after action '" +
                                         model.action_names()[static_cast<std::size_t>(a)] + "'");
    }
    for (auto& e : entries) e.weight /= norm;
    return {Belief(std::move(entries)), norm};
}

Belief belief_update(const Pomdp& model, const Belief& b, ActionId a, ObsId o) {
    return belief_update_with_prob(model, b, a, o).first;
}

// ---------------------------------------------------------------------------
// Payoffs and horizons

double discounted_payoff(std::span<const double> rewards, double gamma, int horizon) {
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    if (rewards.size() < static_cast<std::size_t>(horizon) + 1)
        throw InsufficientLength("discounted payoff over horizon " + std::to_string(horizon) + " needs " +
                                 std::to_string(horizon + 1) + " rewards, got " +
                                 std::to_string(rewards.size()));
    double total = 0.0, factor = 1.0;
    for (int i = 0; i <= horizon; ++i) {
        total += factor * rewards[static_cast<std::size_t>(i)];
        factor *= gamma;
    }
    return total;
}

double discounted_sum(std::span<const double> rewards, double gamma) {
    double total = 0.0, factor = 1.0;
    for (double r : rewards) {
        total += factor * r;
        factor *= gamma;
    }
    return total;
}

double payoff_spread(const Pomdp& model) {
    return std::abs(std::max(0.0, model.max_reward()) - std::min(0.0, model.min_reward()));
}

int horizon_for_epsilon(double gamma, double spread, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in [0,1)");
    const double bound = (1.0 - gamma) * epsilon / 2.0;
    int n = 0;
    while (std::pow(gamma, n) * spread > bound) ++n;
    return n;
}

int horizon_for_epsilon(const Pomdp& model, double epsilon) {
    return horizon_for_epsilon(model.discount(), payoff_spread(model), epsilon);
}

double shift_threshold(double tau, double reward, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("threshold shifting needs a positive discount");
    return (tau - reward) / gamma;
}

HorizonSpec HorizonSpec::fixed(int horizon) {
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    return HorizonSpec(horizon);
}

HorizonSpec HorizonSpec::from_epsilon(double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    return HorizonSpec(epsilon);
}

int HorizonSpec::resolve(const Pomdp& model) const {
    if (const int* n = std::get_if<int>(&value_)) return *n;
    return horizon_for_epsilon(model, std::get<double>(value_));
}

double HorizonSpec::threshold_slack() const {
    if (const double* e = std::get_if<double>(&value_)) return *e / 2.0;
    return 0.0;
}

}  // namespace ramcp
