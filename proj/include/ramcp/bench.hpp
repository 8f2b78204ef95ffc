#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "ramcp/model.hpp"

namespace ramcp {

struct GeneratedModel {
    Pomdp model;
    std::string generator;
    std::map<std::string, std::string> params;
    std::size_t num_states = 0;
};

struct TaskParams {
    double reward = 10.0;
    double penalty = -10.0;
    double p_good = 0.5;
};

/**
 * Grid maze description. Map characters: '#' wall, '.' free, 'S' start,
 * '1'..'9' task of that type, 'T' trap. Cells outside the map count as walls.
 */
struct HallwaySpec {
    std::vector<std::string> map;
    std::map<int, TaskParams> tasks;
    /// Probability of ending up rotated by 0, 90, 180 and 270 degrees clockwise in a trap.
    std::array<double, 4> trap_spin{0.25, 0.25, 0.25, 0.25};
    double discount = 0.95;

    /// Empty when valid.
    std::vector<std::string> problems() const;
};

/**
 * Text form: the grid rows first, then optional directives, one per line:
 *   task <k> <reward> <penalty> <p_good>
 *   trap <p0> <p90> <p180> <p270>
 *   discount <gamma>
 * Task types without a directive use TaskParams defaults.
 */
HallwaySpec parse_hallway_spec(const std::string& text);
HallwaySpec load_hallway_spec(const std::string& path);

GeneratedModel gen_tiger(double discount = 0.95);
GeneratedModel gen_example1();
/// `observable` selects the fully observable variant (one observation per state).
GeneratedModel gen_hallway(const HallwaySpec& spec, bool observable);

/// The 3x3 maze used by the experiments: one task of type 1 next to the start corner.
HallwaySpec hallway_3x3();

/// Built-in benchmarks: tiger, example1, hallway3, hallway3-mdp.
std::vector<std::string> bench_names();
GeneratedModel make_bench(const std::string& name);

}  // namespace ramcp
