#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mlbgg
{

/// PCG-XSH-RR 32-bit generator (O'Neill). Satisfies UniformRandomBitGenerator.
class Pcg32
{
  public:
    using result_type = std::uint32_t;

    Pcg32(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : inc_((stream_id << 1u) | 1u)
    {
        (*this)();
        state_ += seed;
        (*this)();
    }

    result_type operator()() noexcept
    {
        std::uint64_t const old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        auto const xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        auto const rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    static constexpr result_type min() noexcept { return 0u; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    friend bool operator==(Pcg32 const&, Pcg32 const&) = default;

  private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 0;
};

/// One SplitMix64 step; used only to hash seeds and counters together.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30u)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27u)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31u);
}

/// Tags separating the independent random "purposes" of a run.
enum class StreamPurpose : std::uint64_t
{
    layer1_path = 1,
    layer0_path = 2,
    backup_supply = 3,
    alliance_supply = 4,
    test = 99,
};

/*!
 * Derive an independent generator from a root seed and a counter tuple.
 *
 * The counter scheme is `(purpose, trial, network)`: each coordinate is
 * folded into the seed through SplitMix64, and the stream id (PCG increment)
 * is hashed from the same tuple with a different salt. A trial's randomness
 * therefore depends only on its coordinates, never on how many draws other
 * trials consumed, so trials may run in any order or on any worker.
 */
inline Pcg32 substream(std::uint64_t root_seed, StreamPurpose purpose,
                       std::uint64_t trial, std::uint64_t network = 0) noexcept
{
    std::uint64_t seed = splitmix64(root_seed);
    std::uint64_t stream = splitmix64(root_seed ^ 0xD1B54A32D192ED03ULL);
    for (std::uint64_t const c :
         {static_cast<std::uint64_t>(purpose), trial, network})
    {
        seed = splitmix64(seed ^ c);
        stream = splitmix64(stream + c);
    }
    return Pcg32(seed, stream);
}

/// Uniform double in the open interval (0, 1) with 53 random bits.
template<class Generator>
double uniform_open01(Generator& rng)
{
    std::uint64_t const hi = rng();
    std::uint64_t const lo = rng();
    std::uint64_t const bits = ((hi << 32u) | lo) >> 11u;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Exponential variate by inversion.
template<class Generator>
double sample_exponential(Generator& rng, double rate)
{
    return -std::log(uniform_open01(rng)) / rate;
}

} // namespace mlbgg
