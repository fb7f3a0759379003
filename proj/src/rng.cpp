#include "covspot/rng.hpp"

#include <cmath>
#include <numbers>

namespace covspot {

namespace {
constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}

uint64_t splitmix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

uint64_t CounterRng::next_u64() {
    ++counter_;
    return splitmix64(seed_ + counter_ * kGamma);
}

double CounterRng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

uint64_t CounterRng::next_below(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t threshold = -bound % bound;  // 2^64 mod bound
    for (;;) {
        const uint64_t v = next_u64();
        if (v >= threshold) return v % bound;
    }
}

uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return splitmix64(splitmix64(base) ^ (stream * kGamma));
}

uint64_t derive_seed(uint64_t global_seed, SeedRole role) {
    return derive_seed(global_seed, static_cast<uint64_t>(role));
}

std::vector<size_t> random_permutation(CounterRng& rng, size_t n) {
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace covspot
