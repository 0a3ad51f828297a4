#pragma once

#include <cmath>
#include <cstdint>

namespace rotmap {

// PCG-XSH-RR 64/32 (O'Neill). 64-bit state, 64-bit stream selector, 32-bit
// output. Chosen over std::mt19937 / std::*_distribution because the whole
// generator is pinned by algorithm: the same seed yields the same byte
// stream on every toolchain, which the experiment CSVs rely on.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return (hi << 32u) | lo;
    }

    // Uniform on [0, 1), 53 random mantissa bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller without caching: every draw consumes exactly two uniforms,
    // keeping the stream position independent of draw parity.
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Derive an independent child generator. Used to hand one generator per
    // parallel job so results do not depend on scheduling.
    Pcg32 split() {
        const std::uint64_t seed = next_u64();
        const std::uint64_t stream = next_u64();
        return Pcg32(seed, stream);
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

}  // namespace rotmap
