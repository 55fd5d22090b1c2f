#include "rla/random.hpp"

#include "rla/core.hpp"

namespace rla {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed)
{
    std::uint64_t s = seed;
    std::seed_seq seq{
        static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
        static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
    engine_.seed(seq);
}

Rng Rng::stream(std::uint64_t root, std::uint64_t index)
{
    std::uint64_t s = root;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (index * 0xD1B54A32D192ED03ULL);
    return Rng(splitmix64(t));
}

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0)
        throw Error("rng: below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

WeightedUrn::WeightedUrn(std::span<const std::int64_t> weights)
    : tree_(weights.size() + 1, 0), weight_(weights.begin(), weights.end())
{
    while (top_bit_ * 2 <= weights.size())
        top_bit_ *= 2;
    for (std::size_t i = 0; i < weight_.size(); ++i) {
        if (weight_[i] < 0)
            throw Error("weighted urn: negative weight");
        // linear-time build
        tree_[i + 1] += weight_[i];
        std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
        if (parent < tree_.size())
            tree_[parent] += tree_[i + 1];
        total_ += weight_[i];
    }
}

void WeightedUrn::add(std::size_t i, std::int64_t delta)
{
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1))
        tree_[k] += delta;
    total_ += delta;
}

std::size_t WeightedUrn::draw(Rng& rng)
{
    if (total_ == 0)
        throw Error("weighted urn: empty");
    auto r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total_)));
    // Find the smallest index whose prefix sum exceeds r.
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step > 0; step /= 2) {
        if (pos + step < tree_.size() && tree_[pos + step] <= r) {
            pos += step;
            r -= tree_[pos];
        }
    }
    add(pos, -weight_[pos]);
    weight_[pos] = 0;
    return pos;
}

} // namespace rla
