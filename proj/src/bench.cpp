#include "ramcp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ramcp {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

GeneratedModel gen_tiger(double discount) {
    enum { TLq, TRq, TLh, TRh, Good, Bad };
    enum { Listen, OpenLeft, OpenRight };
    enum { Silence, HearLeft, HearRight, ObsGood, ObsBad };
    constexpr double accuracy = 0.85;
    PomdpBuilder b({"tiger-left", "tiger-right", "tiger-left-heard", "tiger-right-heard", "good", "bad"},
                   {"listen", "open-left", "open-right"}, {"silence", "hear-left", "hear-right", "good", "bad"},
                   discount);
    for (int s : {TLq, TLh, TRq, TRh}) {
        const bool left = s == TLq || s == TLh;
        b.set_transition(s, Listen, left ? TLh : TRh, 1.0);
        b.set_transition(s, OpenLeft, left ? Bad : Good, 1.0);
        b.set_transition(s, OpenRight, left ? Good : Bad, 1.0);
        b.set_reward(s, Listen, -1.0);
    }
    for (int s : {Good, Bad}) {
        for (int a : {Listen, OpenLeft, OpenRight}) {
            b.set_transition(s, a, TLq, 0.5);
            b.set_transition(s, a, TRq, 0.5);
            b.set_reward(s, a, s == Good ? 10.0 : -100.0);
        }
    }
    b.set_observation(TLq, Silence, 1.0);
    b.set_observation(TRq, Silence, 1.0);
    b.set_observation(TLh, HearLeft, accuracy);
    b.set_observation(TLh, HearRight, 1.0 - accuracy);
    b.set_observation(TRh, HearRight, accuracy);
    b.set_observation(TRh, HearLeft, 1.0 - accuracy);
    b.set_observation(Good, ObsGood, 1.0);
    b.set_observation(Bad, ObsBad, 1.0);
    b.set_initial({0.5, 0.5, 0.0, 0.0, 0.0, 0.0});
    GeneratedModel g{b.build(), "tiger", {{"discount", fmt(discount)}, {"accuracy", fmt(accuracy)}}, 6};
    require_valid(g.model);
    return g;
}

GeneratedModel gen_example1() {
    enum { S, T, U, V, W, X, Y };
    PomdpBuilder b({"s", "t", "u", "v", "w", "x", "y"}, {"a", "b"}, {"s", "t", "u", "v", "w", "x", "y"}, 0.5);
    for (int a = 0; a < 2; ++a) {
        b.set_transition(S, a, T, 0.5);
        b.set_transition(S, a, U, 0.5);
        b.set_transition(U, a, Y, 1.0);
        for (int s : {V, W, X, Y}) b.set_transition(s, a, s, 1.0);
        b.set_reward(V, a, 10.0);
        b.set_reward(W, a, 10000.0);
        b.set_reward(X, a, -100.0);
        b.set_reward(Y, a, -50.0);
    }
    b.set_transition(T, 0, V, 1.0);
    b.set_transition(T, 1, W, 0.5);
    b.set_transition(T, 1, X, 0.5);
    for (int s = 0; s < 7; ++s) b.set_observation(s, s, 1.0);
    b.set_initial({1.0, 0, 0, 0, 0, 0, 0});
    GeneratedModel g{b.build(), "example1", {{"discount", "0.5"}}, 7};
    require_valid(g.model);
    return g;
}

std::vector<std::string> HallwaySpec::problems() const {
    std::vector<std::string> out;
    if (map.empty()) {
        out.push_back("map is empty");
        return out;
    }
    int starts = 0;
    for (std::size_t r = 0; r < map.size(); ++r) {
        if (map[r].size() != map[0].size()) out.push_back("map row " + std::to_string(r) + " has a different width");
        for (char c : map[r]) {
            if (c == 'S') ++starts;
            else if (c != '#' && c != '.' && c != 'T' && !(c >= '1' && c <= '9'))
                out.push_back(std::string("unknown map character '") + c + "'");
        }
    }
    if (starts != 1) out.push_back("map needs exactly one 'S', found " + std::to_string(starts));
    for (const auto& [k, t] : tasks) {
        if (k < 1 || k > 9) out.push_back("task type " + std::to_string(k) + " outside 1..9");
        if (!(t.p_good >= 0.0 && t.p_good <= 1.0)) out.push_back("task " + std::to_string(k) + " p_good outside [0,1]");
    }
    double spin = 0.0;
    for (double p : trap_spin) {
        if (p < 0.0) out.push_back("negative trap spin probability");
        spin += p;
    }
    if (std::abs(spin - 1.0) > kStochasticTolerance) out.push_back("trap spin distribution does not sum to 1");
    if (!(discount >= 0.0 && discount < 1.0)) out.push_back("discount outside [0,1)");
    return out;
}

HallwaySpec parse_hallway_spec(const std::string& text) {
    HallwaySpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "task") {
            int k = 0;
            TaskParams t;
            if (!(ls >> k >> t.reward >> t.penalty >> t.p_good)) throw ModelError("bad task line: " + line);
            spec.tasks[k] = t;
        } else if (word == "trap") {
            for (double& p : spec.trap_spin)
                if (!(ls >> p)) throw ModelError("bad trap line: " + line);
        } else if (word == "discount") {
            if (!(ls >> spec.discount)) throw ModelError("bad discount line: " + line);
        } else {
            spec.map.push_back(line);
        }
    }
    return spec;
}

HallwaySpec load_hallway_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_hallway_spec(ss.str());
}

namespace {

// Headings: 0 north, 1 east, 2 south, 3 west.
constexpr int kDr[4] = {-1, 0, 1, 0};
constexpr int kDc[4] = {0, 1, 0, -1};
const char* const kHeading[4] = {"N", "E", "S", "W"};

struct Maze {
    const HallwaySpec& spec;
    int rows, cols;
    std::vector<int> cells;      // free cell -> r * cols + c
    std::vector<int> cell_of;    // r * cols + c -> free cell index or -1
    std::vector<int> task_cells; // task index -> cell index
    std::vector<int> task_of;    // cell -> task index or -1
    int types = 0;               // highest task type present
    int start = -1;

    explicit Maze(const HallwaySpec& s)
        : spec(s), rows(static_cast<int>(s.map.size())), cols(static_cast<int>(s.map[0].size())) {
        cell_of.assign(static_cast<std::size_t>(rows * cols), -1);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const char ch = at(r, c);
                if (ch == '#') continue;
                const int id = static_cast<int>(cells.size());
                cell_of[static_cast<std::size_t>(r * cols + c)] = id;
                cells.push_back(r * cols + c);
                task_of.push_back(-1);
                if (ch == 'S') start = id;
                if (ch >= '1' && ch <= '9') {
                    task_of.back() = static_cast<int>(task_cells.size());
                    task_cells.push_back(id);
                    types = std::max(types, ch - '0');
                }
            }
    }

    char at(int r, int c) const { return spec.map[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    char at_cell(int cell) const { return at(cells[static_cast<std::size_t>(cell)] / cols, cells[static_cast<std::size_t>(cell)] % cols); }
    int task_type(int cell) const { return at_cell(cell) - '0'; }

    int neighbor(int cell, int heading) const {
        const int r = cells[static_cast<std::size_t>(cell)] / cols + kDr[heading];
        const int c = cells[static_cast<std::size_t>(cell)] % cols + kDc[heading];
        if (r < 0 || r >= rows || c < 0 || c >= cols) return -1;
        return cell_of[static_cast<std::size_t>(r * cols + c)];
    }

    // bit 0 front, bit 1 right, bit 2 back, bit 3 left
    int wall_mask(int cell, int heading) const {
        int mask = 0;
        for (int k = 0; k < 4; ++k)
            if (neighbor(cell, (heading + k) % 4) < 0) mask |= 1 << k;
        return mask;
    }

    TaskParams params(int type) const {
        auto it = spec.tasks.find(type);
        return it == spec.tasks.end() ? TaskParams{} : it->second;
    }
};

}  // namespace

GeneratedModel gen_hallway(const HallwaySpec& spec, bool observable) {
    if (auto p = spec.problems(); !p.empty()) {
        std::string msg = "invalid hallway spec:";
        for (const auto& s : p) msg += "\n  " + s;
        throw ModelError(msg);
    }
    const Maze maze(spec);
    const int ncells = static_cast<int>(maze.cells.size());
    const int ntasks = static_cast<int>(maze.task_cells.size());
    if (ntasks > 16) throw ModelError("hallway supports at most 16 task cells");
    const int nmasks = 1 << ntasks;
    const int nout = 1 + 2 * maze.types;  // 0 none, 2k-1 good of type k, 2k bad of type k

    auto index = [&](int cell, int h, int mask, int out) { return ((cell * 4 + h) * nmasks + mask) * nout + out; };
    const int nstates = ncells * 4 * nmasks * nout;

    std::vector<std::string> states;
    states.reserve(static_cast<std::size_t>(nstates));
    for (int cell = 0; cell < ncells; ++cell)
        for (int h = 0; h < 4; ++h)
            for (int mask = 0; mask < nmasks; ++mask)
                for (int out = 0; out < nout; ++out) {
                    const int rc = maze.cells[static_cast<std::size_t>(cell)];
                    states.push_back("r" + std::to_string(rc / maze.cols) + "c" + std::to_string(rc % maze.cols) +
                                     kHeading[h] + "m" + std::to_string(mask) + "o" + std::to_string(out));
                }
    std::vector<std::string> observations;
    if (observable) {
        observations = states;
    } else {
        for (int w = 0; w < 16; ++w)
            for (int out = 0; out < nout; ++out)
                observations.push_back("w" + std::to_string(w) + "o" + std::to_string(out));
    }

    enum { Forward, TurnLeft, TurnRight };
    PomdpBuilder b(states, {"forward", "turn-left", "turn-right"}, observations, spec.discount);
    for (int cell = 0; cell < ncells; ++cell)
        for (int h = 0; h < 4; ++h)
            for (int mask = 0; mask < nmasks; ++mask)
                for (int out = 0; out < nout; ++out) {
                    const int s = index(cell, h, mask, out);
                    double r = 0.0;
                    if (out > 0) {
                        const TaskParams t = maze.params((out + 1) / 2);
                        r = out % 2 == 1 ? t.reward : t.penalty;
                    }
                    for (int a = 0; a < 3; ++a) b.set_reward(s, a, r);
                    b.set_transition(s, TurnLeft, index(cell, (h + 3) % 4, mask, 0), 1.0);
                    b.set_transition(s, TurnRight, index(cell, (h + 1) % 4, mask, 0), 1.0);

                    const int next = maze.neighbor(cell, h);
                    if (next < 0) {
                        b.set_transition(s, Forward, index(cell, h, mask, 0), 1.0);
                    } else {
                        std::array<double, 4> spin{1.0, 0.0, 0.0, 0.0};
                        if (maze.at_cell(next) == 'T') spin = spec.trap_spin;
                        const int task = maze.task_of[static_cast<std::size_t>(next)];
                        for (int k = 0; k < 4; ++k) {
                            if (spin[static_cast<std::size_t>(k)] == 0.0) continue;
                            const int nh = (h + k) % 4;
                            const double ps = spin[static_cast<std::size_t>(k)];
                            if (task >= 0 && (mask >> task & 1)) {
                                const int type = maze.task_type(next);
                                const double pg = maze.params(type).p_good;
                                const int nmask = mask & ~(1 << task);
                                if (pg > 0.0) b.set_transition(s, Forward, index(next, nh, nmask, 2 * type - 1), ps * pg);
                                if (pg < 1.0) b.set_transition(s, Forward, index(next, nh, nmask, 2 * type), ps * (1.0 - pg));
                            } else {
                                b.set_transition(s, Forward, index(next, nh, mask, 0), ps);
                            }
                        }
                    }
                    b.set_observation(s, observable ? s : maze.wall_mask(cell, h) * nout + out, 1.0);
                }
    std::vector<double> init(static_cast<std::size_t>(nstates), 0.0);
    for (int h = 0; h < 4; ++h) init[static_cast<std::size_t>(index(maze.start, h, nmasks - 1, 0))] = 0.25;
    b.set_initial(std::move(init));

    std::string map;
    for (const auto& row : spec.map) map += (map.empty() ? "" : "/") + row;
    GeneratedModel g{b.build(),
                     observable ? "hallway-mdp" : "hallway",
                     {{"map", map}, {"discount", fmt(spec.discount)}, {"tasks", std::to_string(ntasks)}},
                     static_cast<std::size_t>(nstates)};
    require_valid(g.model);
    return g;
}

HallwaySpec hallway_3x3() {
    HallwaySpec spec;
    spec.map = {"S1.", "...", "..."};
    spec.tasks[1] = TaskParams{10.0, -10.0, 0.5};
    return spec;
}

std::vector<std::string> bench_names() { return {"tiger", "example1", "hallway3", "hallway3-mdp"}; }

GeneratedModel make_bench(const std::string& name) {
    if (name == "tiger") return gen_tiger();
    if (name == "example1") return gen_example1();
    if (name == "hallway3") return gen_hallway(hallway_3x3(), false);
    if (name == "hallway3-mdp") return gen_hallway(hallway_3x3(), true);
    throw std::invalid_argument("unknown benchmark '" + name + "'");
}

}  // namespace ramcp
