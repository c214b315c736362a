#include <gtest/gtest.h>

#include <map>
#include <set>

#include "mlkit/errors.hpp"
#include "mlkit/samplers.hpp"

using namespace mlkit;

namespace {

std::map<std::int64_t, std::size_t> class_histogram(const IndexBatch& batch, const LabelVector& y) {
  std::map<std::int64_t, std::size_t> h;
  for (std::size_t i : batch) ++h[y[i]];
  return h;
}

}  // namespace

TEST(MPerClass, TwoOfEachOfTwoClasses) {
  const LabelVector y({0, 0, 0, 1, 1, 1});
  SamplerConfig cfg{2, 4, 10, 3};
  for (const IndexBatch& b : m_per_class_batches(y, cfg)) {
    ASSERT_EQ(b.size(), 4u);
    const auto h = class_histogram(b, y);
    EXPECT_EQ(h.size(), 2u);
    for (const auto& [label, count] : h) EXPECT_EQ(count, 2u);
    EXPECT_EQ(std::set<std::size_t>(b.begin(), b.end()).size(), 4u);
  }
}

TEST(MPerClass, SameSeedSameBatches) {
  const LabelVector y({0, 1, 2, 0, 1, 2, 0, 1, 2, 3, 3, 3});
  SamplerConfig cfg{2, 4, 20, 99};
  EXPECT_EQ(m_per_class_batches(y, cfg), m_per_class_batches(y, cfg));
  SamplerConfig other = cfg;
  other.seed = 100;
  EXPECT_NE(m_per_class_batches(y, cfg), m_per_class_batches(y, other));
}

TEST(MPerClass, SingletonClassSampledWithReplacement) {
  const LabelVector y({0, 1, 1, 1});
  SamplerConfig cfg{2, 4, 5, 1};
  for (const IndexBatch& b : m_per_class_batches(y, cfg)) {
    EXPECT_EQ(std::count(b.begin(), b.end(), std::size_t{0}), 2);
  }
}

TEST(MPerClass, ConfigErrors) {
  const LabelVector y({0, 0, 1, 1});
  EXPECT_THROW(MPerClassSampler(y, SamplerConfig{3, 4, 1, 0}), ConfigError);
  EXPECT_THROW(MPerClassSampler(y, SamplerConfig{2, 6, 1, 0}), ConfigError);
  EXPECT_THROW(MPerClassSampler(y, SamplerConfig{0, 4, 1, 0}), ConfigError);
  EXPECT_THROW(MPerClassSampler(y, SamplerConfig{2, 4, 0, 0}), ConfigError);
}

TEST(MPerClassProperties, HistogramHoldsOverSeededEpochs) {
  std::vector<std::int64_t> labels;
  for (std::int64_t c = 0; c < 6; ++c) {
    for (std::int64_t k = 0; k <= c; ++k) labels.push_back(c * 10);
  }
  const LabelVector y(labels);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SamplerConfig cfg{3, 12, 4, seed};
    MPerClassSampler sampler(y, cfg);
    for (const IndexBatch& b : sampler.next_epoch()) {
      ASSERT_EQ(b.size(), 12u);
      const auto h = class_histogram(b, y);
      EXPECT_EQ(h.size(), 4u);
      for (const auto& [label, count] : h) EXPECT_EQ(count, 3u);
      for (std::size_t i : b) EXPECT_LT(i, y.size());
    }
  }
}

TEST(MPerClassProperties, EpochsAdvanceTheStream) {
  const LabelVector y({0, 0, 1, 1, 2, 2, 3, 3});
  MPerClassSampler sampler(y, SamplerConfig{2, 4, 3, 7});
  const auto first = sampler.next_epoch();
  const auto second = sampler.next_epoch();
  EXPECT_EQ(first.size(), 3u);
  EXPECT_NE(first, second);
}
