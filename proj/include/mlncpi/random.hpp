#pragma once

// Named random streams derived from one master seed, so that e.g. the
// generator and the solver draw independent, individually reproducible
// sequences.

#include <cstdint>
#include <string_view>

namespace mlncpi {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

}  // namespace mlncpi
