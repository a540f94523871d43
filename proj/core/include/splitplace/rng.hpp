#pragma once

#include <cstdint>
#include <random>

namespace splitplace {

/// Independent random streams derived from one run seed, so that policies
/// sharing a seed see identical jitter and trace draws regardless of how much
/// randomness other concerns consume.
enum class Stream : std::uint64_t {
  Jitter = 0x6a69747465720001ULL,
  Trace = 0x7472616365000002ULL,
  Scheduler = 0x7363686564000003ULL,
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  return Rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

}  // namespace splitplace
