#include "pullsim/random.hpp"

#include <cmath>
#include <limits>

namespace pullsim {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

double RandomSource::exponential(double rate) {
    // 1 - u lies in (0, 1], so the log is finite.
    return -std::log1p(-uniform()) / rate;
}

std::size_t RandomSource::uniform_index(std::size_t n) {
    // Rejection on the top of the range removes modulo bias.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
}

RandomSource RandomSource::derive(std::uint64_t stream) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

}  // namespace pullsim
