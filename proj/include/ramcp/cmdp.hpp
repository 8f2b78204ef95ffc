#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramcp/lp.hpp"
#include "ramcp/risk.hpp"
#include "ramcp/search.hpp"

namespace ramcp {

class InfeasibleConstraint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DecisionMode { Constrained, RiskMinimizing, Unconstrained };

char mode_letter(DecisionMode m);

struct ActionDecision {
    DecisionMode mode = DecisionMode::Unconstrained;
    std::vector<double> d_pi;               // per action
    std::vector<std::vector<double>> risk;  // d^a(o), [action][observation]
    double objective = std::numeric_limits<double>::quiet_NaN();  // constrained optimum
};

/**
 * Tree-shaped constrained MDP built from the closure of the explicit tree.
 * Nodes are in breadth-first order, so parents precede children and the
 * children of each choice are contiguous.
 */
struct ConstrainedTreeMdp {
    enum class Kind : std::uint8_t { Internal, SafeLeaf, Frontier };

    struct Node {
        Kind kind;
        int depth;
        ActionId action;  // edge from the parent
        ObsId obs;
        double p;
        double terminal;  // frontier estimate, else 0
        NodeId explicit_id;
        std::uint32_t parent_choice;
        std::uint32_t first_choice;
        std::uint32_t num_choices;
    };

    struct Choice {
        ActionId action;
        double reward;  // rew(h,a), or the search estimate V_a for a sink branch
        bool to_sink;
        std::uint32_t node;
        std::uint32_t first_child;
        std::uint32_t num_children;
    };

    double gamma = 0.0;
    int steps = 0;  // decisions left at the root; safe leaves sit at this depth
    std::size_t num_actions = 0;
    std::size_t num_observations = 0;
    std::vector<Node> nodes;
    std::vector<Choice> choices;
    std::vector<double> discount;  // gamma^depth

    /// C(h,a): 1/gamma^steps on safe leaves, 0 elsewhere.
    double penalty(std::uint32_t node) const;
    std::size_t variable_count() const { return choices.size(); }
};

struct CmdpOptions {
    /// Let explicit internal nodes also take searched actions with no safe continuation.
    bool sink_branches = true;
};

ConstrainedTreeMdp build_cmdp(const ClosureTree& closure, const SearchTree& search, const CmdpOptions& options = {});

enum class SolverRoute { Auto, Simplex, Parametric };

struct SolveOptions {
    SolverRoute route = SolverRoute::Auto;
    std::size_t simplex_variable_limit = 400;  // Auto uses the simplex up to this many variables
    std::ostream* lp_dump = nullptr;
};

/**
 * Maximizes expected discounted payoff subject to reaching a safe leaf with
 * probability >= 1 - rbound. Throws InfeasibleConstraint if no policy does.
 */
ActionDecision solve_decision(const ConstrainedTreeMdp& m, const ExplicitTree& tree, double rbound,
                              const SolveOptions& options = {});

/// The occupancy LP of the tree MDP; variable j is y(choice j).
LpProblem occupancy_lp(const ConstrainedTreeMdp& m, double rbound);

/// Probability of reaching a safe leaf under occupancies y.
double safe_mass(const ConstrainedTreeMdp& m, const std::vector<double>& y);
/// Expected discounted penalty, accumulated edge by edge.
double expected_discounted_penalty(const ConstrainedTreeMdp& m, const std::vector<double>& y);

/// argmin_a U_a over allowed root actions, or the searched best action when none is allowed; d^a = 0.
ActionDecision risk_min_fallback(const ExplicitTree& tree, const SearchTree& search, std::size_t num_observations);
ActionDecision unconstrained_decision(const SearchTree& search, std::size_t num_observations);

}  // namespace ramcp
