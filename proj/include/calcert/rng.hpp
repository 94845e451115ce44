#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace calcert {

// Deterministic 64-bit generator (splitmix64). Every sampling site constructs
// its own instance from an explicit seed; there is no global RNG. Identical
// seeds produce identical streams on every platform, which is what makes
// byte-identical reruns and per-index parallel sampling possible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 random bits.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound) via rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream seed from (seed, path...). Used to partition
// the seed space per index / per fold / per repeat so that parallel and serial
// execution orders draw identical values.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
    Rng mix(seed);
    std::uint64_t acc = mix.next_u64();
    for (std::uint64_t p : path) {
        Rng step(acc ^ (p + 0x9e3779b97f4a7c15ULL));
        acc = step.next_u64();
    }
    return acc;
}

// Deterministic Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace calcert
