#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tabal {

// 64-bit FNV-1a, used to fold string tags (image ids, stream names) into
// seeds. Stable across platforms.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Combine a base seed with tags to derive independent substreams.
inline uint64_t combine_seed(uint64_t base, uint64_t tag) {
    return splitmix64(base ^ splitmix64(tag));
}
inline uint64_t combine_seed(uint64_t base, std::string_view tag) {
    return combine_seed(base, fnv1a(tag));
}

// Seeded generator with fully specified draw functions. mt19937_64 output is
// pinned by the standard, and the uniform/bounded mappings below avoid the
// implementation-defined std::*_distribution classes, so identical seeds give
// identical sequences on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1): 53 random bits scaled down.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), never exactly 0 or 1. Safe for log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), unbiased via rejection.
    uint64_t bounded(uint64_t n) {
        if (n < 2) return 0;
        const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tabal
