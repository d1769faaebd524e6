#pragma once

#include <cstdint>
#include <random>

namespace rtxpsim {

// Purpose-labelled random streams. Streams with the same (seed, id) replay
// the same sequence; different ids on the same seed are decorrelated by
// splitmix64 before seeding the engine.
enum class RngStreamId : std::uint64_t {
  topology = 1,
  traffic = 2,
  shadowing = 3,
  csma_backoff = 4,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation for sub-streams (per run, per attempt, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xD1342543DE82EF95ULL;
  h ^= splitmix64(s);
  s ^= b * 0xAF251AF3B0F025B5ULL;
  h ^= splitmix64(s);
  s ^= c * 0x9E6C63D0876A9ACDULL;
  h ^= splitmix64(s);
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, RngStreamId id) {
  std::uint64_t s = seed ^ (static_cast<std::uint64_t>(id) * 0xA0761D6478BD642FULL);
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

} // namespace rtxpsim
