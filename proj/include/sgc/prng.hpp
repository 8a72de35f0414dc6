#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace sgc {

// Deterministic PRNG used everywhere randomness is needed (balanced splits,
// test graph generation). xoshiro256** 1.0 (Blackman & Vigna, xorshift
// family), state seeded from a single 64-bit value via splitmix64. Both
// algorithms are fixed here so that identical seeds produce identical draws
// on every platform and compiler; std:: distributions are deliberately not
// used because their output is implementation-defined.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        // splitmix64 state expansion
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound) by rejection of the biased tail.
    std::uint64_t bounded(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Fisher-Yates; with take < items.size() the first `take` entries are a
    // uniform sample without replacement.
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t take) {
        const std::size_t n = items.size();
        if (take > n) take = n;
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
            std::swap(items[i], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::span<T> items) {
        partial_shuffle(items, items.size());
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace sgc
