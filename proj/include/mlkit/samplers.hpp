#pragma once

#include <cstdint>
#include <vector>

#include "mlkit/core.hpp"
#include "mlkit/rng.hpp"

namespace mlkit {

struct SamplerConfig {
  std::size_t m = 4;
  std::size_t batch_size = 32;
  std::size_t epoch_length = 1;
  std::uint64_t seed = 0;
};

using IndexBatch = std::vector<std::size_t>;

// Draws batch_size / m distinct classes per batch, then m members of each
// (with replacement only when the class has fewer than m members). Batches
// list the classes in draw order, each class's members contiguously.
class MPerClassSampler {
 public:
  // Throws ConfigError when batch_size % m != 0, batch_size / m exceeds the
  // number of classes, or any size is zero.
  MPerClassSampler(const LabelVector& y, const SamplerConfig& cfg);

  // The next epoch_length batches. Single consumer.
  std::vector<IndexBatch> next_epoch();

  std::size_t batches_per_epoch() const { return cfg_.epoch_length; }

 private:
  IndexBatch next_batch();

  SamplerConfig cfg_;
  std::vector<std::vector<std::size_t>> members_;  // by canonical class
  Rng rng_;
};

// One epoch from a freshly seeded sampler.
std::vector<IndexBatch> m_per_class_batches(const LabelVector& y, const SamplerConfig& cfg);

}  // namespace mlkit
