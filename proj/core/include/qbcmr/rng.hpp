#pragma once

#include <cstdint>
#include <random>

namespace qbcmr {

/// Random stream type used throughout the library. Every sampling routine
/// takes one of these by reference; nothing holds hidden global state.
using RngStream = std::mt19937_64;

namespace detail {
// splitmix64: the standard finalizer used to decorrelate seed material.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based stream splitting: (base, counter) -> independent seed.
/// Used for replication-level parallelism so that worker scheduling cannot
/// perturb which random numbers a replication sees.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t counter) {
  return detail::splitmix64(base ^ detail::splitmix64(counter + 1));
}

/// Construct the stream for a given (base seed, counter) pair.
inline RngStream make_stream(std::uint64_t base, std::uint64_t counter = 0) {
  return RngStream(split_seed(base, counter));
}

}  // namespace qbcmr
