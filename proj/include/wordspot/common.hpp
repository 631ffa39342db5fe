#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wordspot {

// Error taxonomy shared with the C API (see wordspot.h for the mirror).
enum class ErrorCode : int {
    invalid_argument = 1,
    config           = 2,
    io               = 3,
    format           = 4,
    capacity         = 5,
    dimension        = 6,
    degenerate       = 7,
    infeasible       = 8,
    state            = 9,
    overflow         = 10,
    internal         = 11,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. std::mt19937 is portable but the std distributions are
// not, and byte-identical artifacts across toolchains are a hard requirement,
// so all draws go through this fixed implementation (splitmix64 seeding a
// xoshiro256**).
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-sensitive mixing of seed material into a single 64-bit stream seed.
inline uint64_t hash_u64(uint64_t a) {
    uint64_t s = a;
    return splitmix64(s);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (value << 6) + (value >> 2));
    return splitmix64(s);
}

inline uint64_t hash_str(uint64_t seed, const std::string& text) {
    uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (unsigned char c : text) h = hash_combine(h, c);
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the paired draw is discarded to keep the stream position
    // a simple function of the call count.
    double normal() {
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Unbiased integer in [0, n) via rejection.
    uint64_t below(uint64_t n) {
        if (n == 0) raise(ErrorCode::invalid_argument, "Rng::below: n must be positive");
        const uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace wordspot
