#include "ramcp/sampler.hpp"

namespace ramcp {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomSource RandomSource::derive(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    std::uint64_t h = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return RandomSource(h);
}

std::size_t RandomSource::below(std::size_t n) {
    if (n <= 1) return 0;
    // Lemire-style rejection keeps the draw unbiased
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

StepSample sample_step(const Pomdp& model, StateId s, ActionId a, RandomSource& rng) {
    const auto trans = model.transitions(s, a);
    const StateId next = trans.size() == 1
                             ? trans[0].next
                             : trans[sample_index(trans, [](const Transition& t) { return t.prob; }, rng)].next;
    const auto emit = model.emissions(next);
    const ObsId obs = emit.size() == 1
                          ? emit[0].obs
                          : emit[sample_index(emit, [](const Emission& e) { return e.prob; }, rng)].obs;
    return {next, obs, model.reward(s, a)};
}

StateId sample_state(const Belief& b, RandomSource& rng) {
    const auto sup = b.support();
    if (sup.size() == 1) return sup[0].state;
    return sup[sample_index(sup, [](const Belief::Entry& e) { return e.weight; }, rng)].state;
}

}  // namespace ramcp
