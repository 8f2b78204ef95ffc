#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "ramcp/model.hpp"

namespace ramcp {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/**
 * Seedable random source. Child streams are derived from a parent seed and
 * a sequence of counters (trial, step, purpose) so that parallel trials never
 * perturb each other's draws.
 */
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent stream keyed by the given counters.
    RandomSource derive(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Index drawn from a discrete distribution given as weights (need not be normalized).
template <typename T, typename WeightFn>
std::size_t sample_index(std::span<const T> items, WeightFn weight, RandomSource& rng) {
    double total = 0.0;
    for (const auto& it : items) total += weight(it);
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < items.size(); ++i) {
        u -= weight(items[i]);
        if (u < 0.0) return i;
    }
    // rounding left u marginally nonnegative: take the last positive item
    for (std::size_t i = items.size(); i-- > 0;)
        if (weight(items[i]) > 0.0) return i;
    return 0;
}

struct StepSample {
    StateId next;
    ObsId obs;
    double reward;
};

StepSample sample_step(const Pomdp& model, StateId s, ActionId a, RandomSource& rng);

StateId sample_state(const Belief& b, RandomSource& rng);

}  // namespace ramcp
