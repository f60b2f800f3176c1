#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "submax/normal.hpp"

namespace submax {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from (base, stream, substream).
/// Used to key per-replication generators so that results do not depend on
/// scheduling or degree of parallelism.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream = 0,
                                 std::uint64_t substream = 0) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ stream);
  h = mix64(h ^ substream);
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t base, std::uint64_t stream = 0,
                                   std::uint64_t substream = 0) {
  return std::mt19937_64(derive_seed(base, stream, substream));
}

/// Uniform draw in the open interval (0,1), 53-bit resolution. Bit-portable
/// given the engine state (no distribution-object state involved).
inline double uniform01(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw by inversion; one engine word per draw.
inline double draw_normal(std::mt19937_64& gen) {
  return normal_quantile(uniform01(gen));
}

/// Student-t draw with integer df, as a normal over the root of an
/// independent mean chi-square. df+1 engine words per draw.
inline double draw_student_t(std::mt19937_64& gen, int df) {
  const double z = draw_normal(gen);
  double ss = 0.0;
  for (int i = 0; i < df; ++i) {
    const double zi = draw_normal(gen);
    ss += zi * zi;
  }
  return z / std::sqrt(ss / static_cast<double>(df));
}

}  // namespace submax
