#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace amigo {

// std::mt19937_64 has a fully specified output sequence; the helpers below
// avoid the implementation-defined std::*_distribution classes so that runs
// replay bit-for-bit.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

/// Samples an index from an unnormalized nonnegative weight vector.
template <class T>
std::size_t sample_categorical(Rng& rng, std::span<const T> probs) {
  double total = 0.0;
  for (T p : probs) total += static_cast<double>(p);
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    u -= static_cast<double>(probs[i]);
    if (u < 0.0) return i;
  }
  // Rounding leftovers land on the last index with nonzero mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > T(0)) return i;
  }
  return 0;
}

inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace amigo
