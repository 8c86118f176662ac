#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace speca {

/// Deterministic RNG: std::mt19937_64 (bit-exact across platforms) with
/// hand-rolled uniform/normal transforms, since the standard distribution
/// objects are not portable.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached so draws come in a
    /// fixed, reproducible order.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is irrelevant at our n << 2^64
        return gen_() % n;
    }

    /// Independent child stream (used by run_batch for per-sample rngs).
    SeededRng spawn(std::uint64_t stream) const {
        return SeededRng(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace speca
