#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evit {

using Rng = std::mt19937_64;

// splitmix64 finaliser; good avalanche for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for stream `index` of `master`. Distinct indices give
/// statistically independent streams; the mapping is platform independent.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index ^ 0x5851f42d4c957f2dULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
  return derive_seed(master, fnv1a64(tag));
}

}  // namespace evit
