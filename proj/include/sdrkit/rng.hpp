#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sdrkit {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t seed_tag(std::uint64_t v) { return v; }
constexpr std::uint64_t seed_tag(std::string_view s) { return fnv1a(s); }

/// Independent stream seed for (base, tag...). Used so that parallel and serial
/// execution draw identical numbers for the same logical unit of work.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, const Tags&... tags) {
  std::uint64_t h = splitmix64(base);
  ((h = splitmix64(h ^ splitmix64(seed_tag(tags) + 0x632be59bd9b4e019ULL))), ...);
  return h;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace sdrkit
