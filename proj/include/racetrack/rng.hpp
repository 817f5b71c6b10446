#pragma once

#include <cstdint>
#include <random>

namespace racetrack {

// splitmix64 finalizer, used to spread (base_seed, run_index) pairs into
// well-separated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return splitmix64(base_seed + 0x9E3779B97F4A7C15ull * (run_index + 1));
}

// Uniform double in [0, 1). std::uniform_real_distribution is not pinned
// bit-for-bit by the standard; this construction is, so seeded runs replay
// exactly across toolchains.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace racetrack
