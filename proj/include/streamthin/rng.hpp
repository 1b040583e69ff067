#pragma once

// Seedable, portable random source. The engine is std::mt19937_64 (bit-exact
// across conforming platforms); variate generation avoids std::*_distribution,
// whose algorithms the standard leaves unspecified. Substreams for parallel
// replications are derived with splitmix64 so that (seed, stream) pairs give
// reproducible, non-overlapping generators.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace streamthin {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of substream `stream` under master `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s) ^ (stream * 0xbf58476d1ce4e5b9ULL);
    return splitmix64(mixed);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive_seed(seed, stream));
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform on {0, ..., n-1}; rejection keeps the draw exactly uniform.
    std::uint64_t integer(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via the polar method (no sin/cos; only sqrt and log).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// In-place Fisher-Yates shuffle; spelled out because std::shuffle's draw
// sequence is implementation-defined.
template <typename T>
void fisher_yates(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.integer(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace streamthin
