#pragma once

#include <cstdint>
#include <random>

#include "rlfuzz/errors.hpp"

namespace rlfuzz {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seeded generator with library-owned uniform mappings, so that draw
// sequences are identical across platforms and standard-library versions.
// Experiment replays depend on that.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent stream derived from this seed; used to keep e.g. offset
    // draws identical between runs that consume different amounts of
    // mutation randomness.
    Rng fork(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ ^ splitmix64(stream)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ContractViolation("Rng::below: n must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform in [lo, hi], both inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        if (hi < lo) throw ContractViolation("Rng::between: hi < lo");
        return lo + below(hi - lo + 1);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, max].
    double real(double max) { return real01() * max; }

    bool chance(double p) { return real01() < p; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace rlfuzz
