#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace covspot {

// SplitMix64 output function (Steele, Lea, Flood 2014).
uint64_t splitmix64(uint64_t x);

// Counter-based generator: output i is splitmix64(seed + (i+1) * GAMMA)
// with GAMMA = 0x9E3779B97F4A7C15. Purely a function of (seed, i), so
// streams are reproducible across platforms and implementations.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_uniform();
    // Uniform in (0, 1]; safe to pass to log().
    double next_uniform_open();
    // Standard normal via Box-Muller on one (next_uniform_open, next_uniform)
    // pair; the second variate of each pair is cached and returned next.
    double next_gaussian();
    // Uniform in [0, bound) without modulo bias (rejection sampling).
    uint64_t next_below(uint64_t bound);

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Named sub-seeds so pipeline components can be re-seeded independently
// from one global seed.
enum class SeedRole : uint64_t {
    datagen = 1,
    backbone = 2,
    init = 3,
    shuffle = 4,
    noise = 5,
};

uint64_t derive_seed(uint64_t base, uint64_t stream);
uint64_t derive_seed(uint64_t global_seed, SeedRole role);

// Fisher-Yates permutation of {0, ..., n-1} driven by rng.
std::vector<size_t> random_permutation(CounterRng& rng, size_t n);

}  // namespace covspot
