#pragma once

#include <cstdint>
#include <random>

namespace rmtnorm {

/// Seed mixer (SplitMix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives the seed of one independent stream from (master seed, parameter set, trial).
/// Streams are addressed, not advanced, so trials can run in any order.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t set_index,
                                           std::uint64_t trial_index) noexcept {
    return mix64(mix64(mix64(master_seed) ^ set_index) ^ (trial_index * 0xd1b54a32d192ed03ULL));
}

/// Reproducible random stream. The engine is mt19937_64, whose output sequence is fixed by the
/// standard; uniform and Gaussian variates are produced here rather than by <random>
/// distributions so the draws are identical across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}
    RngStream(std::uint64_t master_seed, std::uint64_t set_index, std::uint64_t trial_index)
        : engine_(derive_stream_seed(master_seed, set_index, trial_index)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal variate (Marsaglia polar method).
    double gaussian();

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rmtnorm
