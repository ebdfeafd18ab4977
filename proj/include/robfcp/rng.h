#ifndef ROBFCP_RNG_H_
#define ROBFCP_RNG_H_

#include <cstdint>
#include <random>

namespace robfcp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (base, stream tag, index). Distinct tags keep
// e.g. a client's data stream and its attack stream uncorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(base ^ mix64(tag)) + index);
}

inline Rng make_rng(std::uint64_t base, std::uint64_t tag, std::uint64_t index = 0) {
  return Rng(derive_seed(base, tag, index));
}

}  // namespace robfcp

#endif  // ROBFCP_RNG_H_
