#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace smoothfair {

/// Seeded random stream. Only the raw mt19937_64 engine output is used, and
/// every derived draw (uniform, normal, shuffle) is computed here, so a seed
/// reproduces the same sequence regardless of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Standard normal (Marsaglia polar method).
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    void shuffle(std::span<std::size_t> values);
    std::vector<std::size_t> permutation(std::size_t n);

    /// Independent child stream, e.g. one per sweep cell.
    Rng fork(std::uint64_t stream_id) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; mixes a master seed with a cell identifier.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

}  // namespace smoothfair
