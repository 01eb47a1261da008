#ifndef SRSGROUP_RNG_HPP
#define SRSGROUP_RNG_HPP

#include <cstdint>
#include <random>

namespace srsgroup {

// splitmix64: cheap stateless mixer used to derive independent substream
// seeds from one master seed. Substreams are identified by small tags so
// that parallel loops stay reproducible regardless of thread schedule.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0)
{
    return splitmix64(splitmix64(base ^ (stream * 0x9e3779b97f4a7c15ULL)) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0)
{
    return std::mt19937_64(derive_seed(base, stream, index));
}

// Fixed stream tags for the experiment pipeline.
namespace rng_stream {
inline constexpr std::uint64_t trajectory = 1;
inline constexpr std::uint64_t scatterer_phase = 2;
inline constexpr std::uint64_t layer_phase = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t mask = 5;
inline constexpr std::uint64_t weight_init = 6;
inline constexpr std::uint64_t shuffle = 7;
} // namespace rng_stream

} // namespace srsgroup

#endif
