#pragma once

// Portable deterministic number streams. std:: distributions are not
// specified bit-for-bit across standard libraries, so seeded quantities that
// end up in golden files are drawn from these instead.

#include <cstddef>
#include <cstdint>

namespace specled {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// Radical inverse of `index` in base `prime_base` (one Halton coordinate).
inline double radical_inverse(std::uint64_t index, unsigned prime_base) {
    const double inv = 1.0 / prime_base;
    double f = inv;
    double result = 0.0;
    while (index > 0) {
        result += f * static_cast<double>(index % prime_base);
        index /= prime_base;
        f *= inv;
    }
    return result;
}

/// The d-th prime, d >= 0 (2, 3, 5, ...). Enough for 2 * 64 dimensions.
inline unsigned nth_prime(std::size_t d) {
    static constexpr unsigned primes[] = {
        2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
        59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
        137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
        227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311,
        313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409,
        419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503,
        509, 521, 523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613,
        617, 619, 631, 641, 643, 647, 653, 659, 661, 673, 677, 683, 691, 701, 709, 719};
    return primes[d % (sizeof(primes) / sizeof(primes[0]))];
}

} // namespace specled
