#pragma once

#include <cstdint>
#include <random>

namespace rofso {

/// Portable seeded random stream.
///
/// Engine output of std::mt19937_64 is fixed by the standard, but the
/// std distributions are not, so uniform and normal variates are derived
/// here directly from raw engine words. Two streams built from the same
/// seed produce bit-identical sequences on every conforming platform.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  /// Standard normal by inversion of the normal CDF.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Independent child stream; `stream` selects a fixed offset so the
  /// derived seed does not depend on how much of this stream was consumed.
  [[nodiscard]] static Rng derive(std::uint64_t master_seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace rofso
