#pragma once

#include <cstdint>
#include <random>

namespace haarprod {

/// SplitMix64 finalizer. Used to derive substream seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// A seeded random stream that can be split into independent, addressable
/// substreams. Substream seeds are a fixed function of (parent seed, index),
/// so trial t / matrix i always sees the same numbers regardless of the order
/// or thread in which it is evaluated.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] RngStream substream(std::uint64_t index) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace haarprod
