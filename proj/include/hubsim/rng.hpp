#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace hubsim {

// Reproducible random streams. Every replicate of every experiment owns a
// stream derived from (master_seed, replicate, purpose); the derivation below
// is part of the output contract so that runs can be reproduced bit-for-bit:
//
//   h        = fnv1a64(purpose)
//   seed     = mix(mix(mix(master) ^ h) ^ replicate)
//   mix      = splitmix64 finalizer
//
// The stream generator itself is xoshiro256++ seeded by four splitmix64 draws
// from `seed`; its identity string is recorded in run metadata.

inline constexpr std::string_view kGeneratorId = "xoshiro256++/splitmix64-derive";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t replicate,
                                           std::string_view purpose) {
    std::uint64_t s = splitmix64_mix(master);
    s = splitmix64_mix(s ^ fnv1a64(purpose));
    s = splitmix64_mix(s ^ replicate);
    return s;
}

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z = splitmix64_mix(z + 0x9E3779B97F4A7C15ULL);
            w = z;
        }
        // avoid the all-zero state (cannot occur from splitmix64, but keep it explicit)
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // inverse-CDF exponential; reproducible across platforms (no library sampler)
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias < 2^-64, irrelevant at our sample sizes
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

inline RngStream derive_stream(std::uint64_t master, std::uint64_t replicate,
                               std::string_view purpose) {
    return RngStream(derive_stream_seed(master, replicate, purpose));
}

}  // namespace hubsim
