#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace qkdsim {

// SplitMix64 finalizer (Steele, Lea & Flood). Used both as the stream
// generator and to derive independent sub-streams from (seed, index) pairs,
// so results do not depend on how work is batched across threads.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a sub-stream seed from a base seed and up to two indices.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(base) ^ a) ^ b);
}

/// Small deterministic PRNG. All sampling is hand-rolled on top of the raw
/// 64-bit stream; the C++ standard leaves distribution algorithms
/// implementation-defined, which would break bit-reproducible outputs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_double() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform double in [0, 1).
    double next_double_co() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double_co() < p; }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (stateless form, one value per call).
    double gaussian() {
        const double u1 = next_double();
        const double u2 = next_double_co();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Exact Binomial(n, p) sample by geometric waiting times, O(n*p) expected.
    long long binomial(long long n, double p) {
        if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
        if (p <= 0.0 || n == 0) return 0;
        if (p >= 1.0) return n;
        const double log_q = std::log1p(-p);
        long long count = 0;
        long long pos = 0;
        for (;;) {
            const double g = std::log(next_double()) / log_q;  // >= 0
            if (g >= static_cast<double>(n - pos)) break;
            pos += static_cast<long long>(g) + 1;
            if (pos > n) break;
            ++count;
        }
        return count;
    }

private:
    std::uint64_t state_;
};

}  // namespace qkdsim
