#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mlkit {

// Seeded generator with platform-stable derived distributions.
//
// std::mt19937_64 is fully specified by the standard, but the library
// distributions are not, so uniform, bounded-integer and Gaussian draws are
// derived here: 53-bit mantissa uniforms, rejection-sampled integers and
// Box-Muller normals. Sequences are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Uniform integer in [0, bound). bound must be > 0.
  std::size_t below(std::size_t bound);

  double normal(double mean = 0.0, double stddev = 1.0);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mlkit
