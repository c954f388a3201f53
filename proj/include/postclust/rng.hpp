#ifndef POSTCLUST_RNG_HPP
#define POSTCLUST_RNG_HPP

#include <cstdint>
#include <vector>

namespace postclust {

// splitmix64 output mixer. Used both as a standalone stream and to seed
// the xoshiro state below, so results are reproducible across platforms
// (std::mt19937_64 distributions are implementation-defined; these are not).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a counter
// (replicate index, worker chunk, ...). Pure function of its inputs.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    std::uint64_t s = base ^ (0x9E3779B97F4A7C15ULL * (counter + 1));
    return splitmix64_next(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

// xoshiro256** seeded via splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) without modulo bias (Lemire).
    std::uint64_t next_below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * static_cast<u128>(bound);
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * static_cast<u128>(bound);
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller; keeps the paired deviate.
    double next_gaussian();

    // First k entries of a Fisher-Yates partial shuffle of {0, ..., n-1}:
    // k distinct indices sampled without replacement.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    bool has_spare_;
    double spare_;
};

} // namespace postclust

#endif
