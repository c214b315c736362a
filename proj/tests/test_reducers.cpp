#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "mlkit/errors.hpp"
#include "mlkit/reducers.hpp"

using namespace mlkit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_values(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

}  // namespace

TEST(Reduce, ThresholdBand) {
  EXPECT_EQ(reduce_values({5, 15, 25, 35}, ReducerRule::threshold(10, 30)), 20.0);
}

TEST(Reduce, ThresholdKeepsBoundaries) {
  EXPECT_EQ(reduce_values({10, 30, 31}, ReducerRule::threshold(10, 30)), 20.0);
}

TEST(Reduce, MeanAndSum) {
  EXPECT_EQ(reduce_values({1, 2, 3}, ReducerRule::mean()), 2.0);
  EXPECT_EQ(reduce_values({1, 2, 3}, ReducerRule::sum()), 6.0);
}

TEST(Reduce, EmptyListsGiveZero) {
  EXPECT_EQ(reduce_values({}, ReducerRule::mean()), 0.0);
  EXPECT_EQ(reduce_values({1, 2}, ReducerRule::threshold(5, 6)), 0.0);
  EXPECT_EQ(reduce(LossBundle{}, ReducerKind{}), 0.0);
}

TEST(Reduce, ThresholdRejectsInvertedBand) {
  EXPECT_THROW(ReducerRule::threshold(3, 2), ConfigError);
}

TEST(Reduce, ArityResultsAreSummed) {
  LossBundle b;
  b.per_pos_pair.push(1.0, {0, 1});
  b.per_pos_pair.push(3.0, {1, 0});
  b.per_neg_pair.push(4.0, {0, 2});
  EXPECT_EQ(reduce(b, ReducerKind{}), 2.0 + 4.0);
}

TEST(Reduce, PerArityOverride) {
  LossBundle b;
  b.per_pos_pair.push(1.0, {0, 1});
  b.per_pos_pair.push(3.0, {1, 0});
  b.per_neg_pair.push(4.0, {0, 2});
  b.per_neg_pair.push(6.0, {1, 2});
  ReducerKind r;
  r.overrides[LossArity::NegPair] = ReducerRule::sum();
  EXPECT_EQ(reduce(b, r), 2.0 + 10.0);
  EXPECT_EQ(r.rule_for(LossArity::PosPair).type, ReducerRule::Type::Mean);
}

TEST(ReduceProperties, OpenThresholdEqualsMean) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_values(gen, 1 + trial % 17);
    EXPECT_NEAR(reduce_values(v, ReducerRule::threshold(-kInf, kInf)),
                reduce_values(v, ReducerRule::mean()), 1e-12);
  }
}

TEST(ReduceProperties, SumIsMeanTimesCount) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_values(gen, 1 + trial % 13);
    EXPECT_NEAR(reduce_values(v, ReducerRule::sum()),
                reduce_values(v, ReducerRule::mean()) * static_cast<double>(v.size()), 1e-12);
  }
}

TEST(ReduceProperties, ThresholdPermutationInvariant) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_values(gen, 10);
    const double before = reduce_values(v, ReducerRule::threshold(10, 30));
    std::shuffle(v.begin(), v.end(), gen);
    EXPECT_NEAR(reduce_values(v, ReducerRule::threshold(10, 30)), before, 1e-12);
  }
}

TEST(ReduceProperties, MonotoneInAKeptValue) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_values(gen, 6);
    for (const ReducerRule& rule : {ReducerRule::mean(), ReducerRule::sum()}) {
      const double before = reduce_values(v, rule);
      auto raised = v;
      raised[trial % 6] += 1.0;
      EXPECT_GT(reduce_values(raised, rule), before);
    }
  }
}

TEST(ReduceWeights, DerivativesOfEachRule) {
  const std::vector<double> v{5, 15, 25, 35};
  EXPECT_EQ(reduce_weights(v, ReducerRule::mean()), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(reduce_weights(v, ReducerRule::sum()), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(reduce_weights(v, ReducerRule::threshold(10, 30)),
            (std::vector<double>{0, 0.5, 0.5, 0}));
}
