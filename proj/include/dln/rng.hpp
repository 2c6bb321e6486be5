// Seeded xorshift64* generator for reproducible random step-ratio sequences.
// The exact recurrence is documented in the README so other implementations
// can reproduce identical sequences bit for bit.
#pragma once

#include <cmath>
#include <cstdint>

namespace dln {

/// Marsaglia xorshift64* : shifts 12/25/27, output multiplied by
/// 0x2545F4914F6CDD1D. A zero seed is replaced by a fixed nonzero constant.
class Xorshift64Star {
public:
    explicit Xorshift64Star(std::uint64_t seed)
        : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

    std::uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Log-uniform draw in [lo, hi].
    double next_log_uniform(double lo, double hi) {
        return std::exp(std::log(lo) + next_double() * (std::log(hi) - std::log(lo)));
    }

private:
    std::uint64_t state_;
};

}  // namespace dln
