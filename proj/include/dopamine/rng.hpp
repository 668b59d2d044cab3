#pragma once

#include <cstdint>
#include <random>

namespace dopamine {

/// Deterministic random source. The engine is mt19937_64 (fully specified by
/// the standard) and every distribution is generated with explicit arithmetic
/// here, so identical seeds give identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Gamma(shape, rate 1), shape > 0. Marsaglia-Tsang for shape >= 1;
  /// for shape < 1 the boost N = N_{shape+1} * U^{1/shape}. Strictly positive.
  double gamma(double shape);

 private:
  double uniform_open();  // (0, 1)

  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// One fixed stream-splitting function so independent substreams (noise,
/// shuffling, level draws) can be derived from a single user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_tag);

}  // namespace dopamine
