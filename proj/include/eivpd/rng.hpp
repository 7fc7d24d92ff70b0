#pragma once

#include <cstdint>
#include <random>

namespace eivpd {

//! SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Seed for child stream `index` of `parent`. Replication r of a study uses
//! derive_seed(master, r), which does not depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
{
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_stream(std::uint64_t parent, std::uint64_t index)
{
  return std::mt19937_64(derive_seed(parent, index));
}

} // namespace eivpd
