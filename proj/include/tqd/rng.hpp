#pragma once

#include <cstdint>
#include <random>

namespace tqd {

/// Seeded 64-bit Mersenne Twister with the handful of draws this project needs.
/// Streams derived with `split` are independent of each other and of the parent.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : Rng(seed, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Derive a child stream, e.g. one per thread or per probe unit.
    static Rng split(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream + 1); }

    /// Uniform on [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double normal() { return normal_(engine_); }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace tqd
