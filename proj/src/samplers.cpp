#include "mlkit/samplers.hpp"

#include <numeric>
#include <utility>

namespace mlkit {

MPerClassSampler::MPerClassSampler(const LabelVector& y, const SamplerConfig& cfg)
    : cfg_(cfg), members_(y.num_classes()), rng_(cfg.seed) {
  if (cfg.m == 0 || cfg.batch_size == 0 || cfg.epoch_length == 0) {
    throw ConfigError("sampler m, batch_size and epoch_length must be positive");
  }
  if (cfg.batch_size % cfg.m != 0) {
    throw ConfigError("sampler batch_size must be divisible by m");
  }
  if (cfg.batch_size / cfg.m > y.num_classes()) {
    throw ConfigError("sampler needs " + std::to_string(cfg.batch_size / cfg.m) +
                      " classes per batch but labels have " +
                      std::to_string(y.num_classes()));
  }
  for (std::size_t i = 0; i < y.size(); ++i) members_[y.canonical(i)].push_back(i);
}

IndexBatch MPerClassSampler::next_batch() {
  const std::size_t classes_per_batch = cfg_.batch_size / cfg_.m;
  std::vector<std::size_t> classes(members_.size());
  std::iota(classes.begin(), classes.end(), std::size_t{0});
  // Partial Fisher-Yates: the first classes_per_batch slots are the draw.
  for (std::size_t k = 0; k < classes_per_batch; ++k) {
    std::swap(classes[k], classes[k + rng_.below(classes.size() - k)]);
  }

  IndexBatch batch;
  batch.reserve(cfg_.batch_size);
  for (std::size_t k = 0; k < classes_per_batch; ++k) {
    std::vector<std::size_t> pool = members_[classes[k]];
    if (pool.size() < cfg_.m) {
      for (std::size_t r = 0; r < cfg_.m; ++r) batch.push_back(pool[rng_.below(pool.size())]);
      continue;
    }
    for (std::size_t r = 0; r < cfg_.m; ++r) {
      std::swap(pool[r], pool[r + rng_.below(pool.size() - r)]);
      batch.push_back(pool[r]);
    }
  }
  return batch;
}

std::vector<IndexBatch> MPerClassSampler::next_epoch() {
  std::vector<IndexBatch> out;
  out.reserve(cfg_.epoch_length);
  for (std::size_t b = 0; b < cfg_.epoch_length; ++b) out.push_back(next_batch());
  return out;
}

std::vector<IndexBatch> m_per_class_batches(const LabelVector& y, const SamplerConfig& cfg) {
  MPerClassSampler sampler(y, cfg);
  return sampler.next_epoch();
}

}  // namespace mlkit
