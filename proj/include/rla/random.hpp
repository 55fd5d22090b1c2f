#pragma once

// Seeded randomness. Every draw goes through Rng so results only depend on
// the std::mt19937_64 engine (fully specified by the standard) and the
// helpers below, never on implementation-defined distributions.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rla {

std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Independent generator for substream `index` of `root`.
    /// Seed = splitmix64 applied to root, then mixed with index.
    static Rng stream(std::uint64_t root, std::uint64_t index);

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// Draws indices without replacement, each with probability proportional to
/// its remaining weight. Fenwick tree; O(log n) per draw.
class WeightedUrn {
public:
    explicit WeightedUrn(std::span<const std::int64_t> weights);

    bool empty() const { return total_ == 0; }
    std::int64_t total() const { return total_; }
    std::size_t draw(Rng& rng);

private:
    void add(std::size_t i, std::int64_t delta);

    std::vector<std::int64_t> tree_;
    std::vector<std::int64_t> weight_;
    std::int64_t total_ = 0;
    std::size_t top_bit_ = 1;
};

} // namespace rla
