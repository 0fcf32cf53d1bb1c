#pragma once

#include <cstdint>
#include <string_view>

namespace ndg::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based draw keyed by (seed, a, b, c); pure function of its inputs.
constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix(mix(mix(mix(seed) ^ a) ^ b) ^ c);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

constexpr double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return to_unit(key(seed, a, b, c));
}

/// Sub-seed for a named purpose (forcing, noise, v0, ...) from a master seed.
constexpr std::uint64_t derive(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : label) h = (h ^ std::uint8_t(ch)) * 0x100000001b3ULL;
  return mix(master ^ mix(h));
}

}  // namespace ndg::rng
