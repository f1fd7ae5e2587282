#pragma once

#include <cstdint>
#include <random>

namespace htmax {

/// Seedable uniform generator with a platform-independent value stream.
///
/// std::mt19937_64 produces a standardized bit stream; the mapping to doubles
/// below uses the top 53 bits directly instead of std::uniform_real_distribution,
/// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform sample from [lo, hi).
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    /// Fair coin.
    bool flip() { return (gen_() >> 63) != 0; }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace htmax
