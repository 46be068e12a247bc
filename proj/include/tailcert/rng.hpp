#pragma once

// Deterministic random streams.  A (seed, stream) pair is hashed with
// splitmix64 into the state of a 64-bit Mersenne twister, so replicate i of
// an experiment always sees the same numbers regardless of which worker runs
// it.  Variate transforms are written out here instead of using the standard
// distributions, whose algorithms differ between library implementations.

#include <cstdint>
#include <random>

namespace tailcert {

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for substream `stream` of `seed`; distinct streams give unrelated seeds.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();
  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape);
  double rademacher() { return (bits() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tailcert
