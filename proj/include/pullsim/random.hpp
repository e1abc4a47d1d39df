#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pullsim {

/// Seeded pseudo-random source shared by every stochastic operation.
///
/// Variates are produced from the raw 64-bit engine output with explicit
/// transforms rather than the <random> distribution classes, whose algorithms
/// are implementation-defined. A given seed therefore yields the same stream
/// on every standard library.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given rate (mean 1/rate).
    double exponential(double rate);

    /// Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

    /// Child source for an independent stream, e.g. one per worker or per seed.
    /// Depends only on (seed, stream), never on how much of this source has
    /// been consumed.
    RandomSource derive(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace pullsim
