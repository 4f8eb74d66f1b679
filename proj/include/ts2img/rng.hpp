#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <vector>

namespace ts2img {

// Counter-based PRNG: a splitmix64 finalizer applied to (key, counter).
// Every draw is a pure function of the key and the draw index, so streams
// can be derived per (seed, epoch, batch, ...) tuple and replayed exactly.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    // Mixes several words into one key (order-sensitive).
    static CounterRng keyed(std::initializer_list<std::uint64_t> words) {
        std::uint64_t k = 0x9e3779b97f4a7c15ull;
        for (std::uint64_t w : words) k = mix64(k ^ mix64(w));
        return CounterRng(k);
    }

    static constexpr std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix64(key_ ^ counter_++); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), rejection-sampled so it is unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller; the paired value is cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

} // namespace ts2img
