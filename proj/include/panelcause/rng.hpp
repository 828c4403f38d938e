#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace panelcause::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based key: a pure function of the seed and the counters, so any
/// substream can be regenerated independently of scheduling.
inline std::uint64_t substream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return std::mt19937_64(substream_key(seed, counters));
}

/// +1 or -1 with equal probability, from (seed, draw, unit).
inline double rademacher(std::uint64_t seed, std::uint64_t draw, std::uint64_t unit) {
  return (substream_key(seed, {draw, unit}) >> 63) ? 1.0 : -1.0;
}

}  // namespace panelcause::rng
