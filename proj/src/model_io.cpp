#include "ramcp/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace ramcp {

namespace {

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<std::string> tokenize(std::string text) {
    // ':' is a separator token even when glued to a word ("T:", "a:b")
    std::string spaced;
    spaced.reserve(text.size() + 8);
    for (char c : text) {
        if (c == ':') {
            spaced += " : ";
        } else {
            spaced += c;
        }
    }
    std::istringstream is(spaced);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ModelError("model line " + std::to_string(line) + ": " + msg);
}

double to_real(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) fail(line, "bad number '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        fail(line, "bad number '" + tok + "'");
    }
}

std::vector<int> resolve(const std::vector<std::string>& names, const std::string& tok, int line,
                         const char* what) {
    if (tok == "*") {
        std::vector<int> all(names.size());
        for (std::size_t i = 0; i < names.size(); ++i) all[i] = static_cast<int>(i);
        return all;
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == tok) return {static_cast<int>(i)};
    fail(line, std::string("unknown ") + what + " '" + tok + "'");
}

void expect_colon(const Line& l, std::size_t idx) {
    if (idx >= l.tokens.size() || l.tokens[idx] != ":") fail(l.number, "expected ':'");
}

}  // namespace

Pomdp parse_model(std::istream& in) {
    std::vector<Line> lines;
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        auto tokens = tokenize(raw);
        if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
    }

    std::optional<double> discount;
    std::vector<std::string> states, actions, observations;
    std::vector<double> start;
    std::vector<const Line*> entries;

    auto names_after = [](const Line& l) {
        expect_colon(l, 1);
        std::vector<std::string> v(l.tokens.begin() + 2, l.tokens.end());
        if (v.empty()) fail(l.number, "empty list for '" + l.tokens[0] + "'");
        return v;
    };

    for (const auto& l : lines) {
        const auto& key = l.tokens[0];
        if (key == "discount") {
            expect_colon(l, 1);
            if (l.tokens.size() != 3) fail(l.number, "discount takes one value");
            discount = to_real(l.tokens[2], l.number);
        } else if (key == "states") {
            states = names_after(l);
        } else if (key == "actions") {
            actions = names_after(l);
        } else if (key == "observations") {
            observations = names_after(l);
        } else if (key == "start") {
            for (const auto& t : names_after(l)) start.push_back(to_real(t, l.number));
        } else if (key == "T" || key == "O" || key == "R") {
            entries.push_back(&l);
        } else {
            fail(l.number, "unknown directive '" + key + "'");
        }
    }

    if (!discount) throw ModelError("model is missing 'discount:'");
    if (states.empty()) throw ModelError("model is missing 'states:'");
    if (actions.empty()) throw ModelError("model is missing 'actions:'");
    if (observations.empty()) throw ModelError("model is missing 'observations:'");
    if (start.empty()) throw ModelError("model is missing 'start:'");

    PomdpBuilder builder(states, actions, observations, *discount);
    builder.set_initial(start);

    for (const Line* lp : entries) {
        const Line& l = *lp;
        const auto& t = l.tokens;
        if (t[0] == "T") {
            // T : a : s : s' p
            if (t.size() != 8) fail(l.number, "expected 'T: <action> : <s> : <s'> <prob>'");
            expect_colon(l, 1);
            expect_colon(l, 3);
            expect_colon(l, 5);
            const double p = to_real(t[7], l.number);
            for (int a : resolve(actions, t[2], l.number, "action"))
                for (int s : resolve(states, t[4], l.number, "state"))
                    for (int n : resolve(states, t[6], l.number, "state")) builder.set_transition(s, a, n, p);
        } else if (t[0] == "O") {
            // O : s : o p
            if (t.size() != 6) fail(l.number, "expected 'O: <s> : <o> <prob>'");
            expect_colon(l, 1);
            expect_colon(l, 3);
            const double p = to_real(t[5], l.number);
            for (int s : resolve(states, t[2], l.number, "state"))
                for (int o : resolve(observations, t[4], l.number, "observation")) builder.set_observation(s, o, p);
        } else {
            // R : s : a r
            if (t.size() != 6) fail(l.number, "expected 'R: <s> : <action> <reward>'");
            expect_colon(l, 1);
            expect_colon(l, 3);
            const double r = to_real(t[5], l.number);
            for (int s : resolve(states, t[2], l.number, "state"))
                for (int a : resolve(actions, t[4], l.number, "action")) builder.set_reward(s, a, r);
        }
    }
    return builder.build();
}

Pomdp parse_model_string(const std::string& text) {
    std::istringstream is(text);
    return parse_model(is);
}

Pomdp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    Pomdp m = parse_model(in);
    require_valid(m);
    return m;
}

void write_model(std::ostream& out, const Pomdp& model) {
    const auto old_precision = out.precision();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    auto list = [&](const char* key, const std::vector<std::string>& names) {
        out << key << ':';
        for (const auto& n : names) out << ' ' << n;
        out << '\n';
    };
    out << "discount: " << model.discount() << '\n';
    list("states", model.state_names());
    list("actions", model.action_names());
    list("observations", model.observation_names());
    out << "start:";
    for (double w : model.initial_belief().dense(model.num_states())) out << ' ' << w;
    out << '\n';

    const auto& sn = model.state_names();
    const auto& an = model.action_names();
    const auto& on = model.observation_names();
    for (std::size_t a = 0; a < model.num_actions(); ++a)
        for (std::size_t s = 0; s < model.num_states(); ++s)
            for (const auto& t : model.transitions(static_cast<StateId>(s), static_cast<ActionId>(a)))
                out << "T: " << an[a] << " : " << sn[s] << " : " << sn[static_cast<std::size_t>(t.next)] << ' '
                    << t.prob << '\n';
    for (std::size_t s = 0; s < model.num_states(); ++s)
        for (const auto& e : model.emissions(static_cast<StateId>(s)))
            out << "O: " << sn[s] << " : " << on[static_cast<std::size_t>(e.obs)] << ' ' << e.prob << '\n';
    for (std::size_t s = 0; s < model.num_states(); ++s)
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            const double r = model.reward(static_cast<StateId>(s), static_cast<ActionId>(a));
            if (r != 0.0) out << "R: " << sn[s] << " : " << an[a] << ' ' << r << '\n';
        }
    out.precision(old_precision);
}

std::string model_to_string(const Pomdp& model) {
    std::ostringstream os;
    write_model(os, model);
    return os.str();
}

}  // namespace ramcp
