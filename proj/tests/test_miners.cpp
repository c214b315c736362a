#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "mlkit/errors.hpp"
#include "mlkit/miners.hpp"
#include "oracles.hpp"

using namespace mlkit;

namespace {

std::set<oracle::Pair> as_set(const std::vector<IndexPair>& pairs) {
  std::set<oracle::Pair> s;
  for (const auto& p : pairs) s.insert({p[0], p[1]});
  return s;
}

std::vector<std::int64_t> random_labels(std::mt19937_64& gen, std::size_t n, std::int64_t classes) {
  std::uniform_int_distribution<std::int64_t> dist(0, classes - 1);
  std::vector<std::int64_t> y(n);
  for (auto& v : y) v = dist(gen);
  return y;
}

std::vector<std::vector<double>> table(const DistanceMatrix& m) {
  std::vector<std::vector<double>> t(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t[i][j] = m(i, j);
  }
  return t;
}

}  // namespace

TEST(AllTuples, PairsEnumeration) {
  const TupleSet t = all_tuples(LabelVector({0, 0, 1}), TupleArity::Pairs);
  EXPECT_EQ(t.pos_pairs, (std::vector<IndexPair>{{0, 1}, {1, 0}}));
  EXPECT_EQ(t.neg_pairs, (std::vector<IndexPair>{{0, 2}, {1, 2}, {2, 0}, {2, 1}}));
  EXPECT_TRUE(t.triplets.empty());
}

TEST(AllTuples, TripletEnumeration) {
  const TupleSet t = all_tuples(LabelVector({0, 0, 1}), TupleArity::Triplets);
  EXPECT_EQ(t.triplets, (std::vector<IndexTriplet>{{0, 1, 2}, {1, 0, 2}}));
  EXPECT_TRUE(t.pos_pairs.empty());
  EXPECT_EQ(t.arity, TupleArity::Triplets);
}

TEST(AllTuples, NoRepeatedClass) {
  EXPECT_TRUE(all_tuples(LabelVector({0, 1, 2}), TupleArity::Pairs).pos_pairs.empty());
}

TEST(Miner, HandExampleWithSimilarities) {
  DistanceMatrix m;
  m.values = Matrix{{1.0, 0.9, 0.4, 0.5}, {0.9, 1.0, 0.0, 0.0}, {0.4, 0.0, 1.0, 0.0},
                    {0.5, 0.0, 0.0, 1.0}};
  m.inverted = true;
  m.kind = DistanceKind::cosine();
  const LabelVector y({0, 0, 0, 1});
  const TupleSet t = multi_similarity_mine(m, y, 0.1);
  std::vector<IndexPair> pos0, neg0;
  for (const auto& p : t.pos_pairs) {
    if (p[0] == 0) pos0.push_back(p);
  }
  for (const auto& p : t.neg_pairs) {
    if (p[0] == 0) neg0.push_back(p);
  }
  EXPECT_EQ(pos0, (std::vector<IndexPair>{{0, 2}}));
  EXPECT_EQ(neg0, (std::vector<IndexPair>{{0, 3}}));
}

TEST(Miner, InfiniteEpsilonKeepsEverythingUsable) {
  std::mt19937_64 gen(1);
  const Matrix x = oracle::random_matrix(9, 3, gen);
  const LabelVector y({0, 0, 1, 1, 1, 2, 2, 3, 0});
  MinerConfig cfg;
  cfg.epsilon = std::numeric_limits<double>::infinity();
  const TupleSet t = multi_similarity_miner(x, y, cfg);
  const TupleSet all = all_tuples(y, TupleArity::Pairs);
  // Anchor 7 has no positives, so it is dropped.
  std::vector<IndexPair> expected_pos = all.pos_pairs, expected_neg;
  for (const auto& p : all.neg_pairs) {
    if (p[0] != 7) expected_neg.push_back(p);
  }
  EXPECT_EQ(t.pos_pairs, expected_pos);
  EXPECT_EQ(t.neg_pairs, expected_neg);
}

TEST(Miner, SingleClassGivesNothing) {
  std::mt19937_64 gen(2);
  const TupleSet t =
      multi_similarity_miner(oracle::random_matrix(5, 2, gen), LabelVector({4, 4, 4, 4, 4}), {});
  EXPECT_TRUE(t.empty());
}

TEST(Miner, RejectsNegativeEpsilon) {
  MinerConfig cfg;
  cfg.epsilon = -0.1;
  EXPECT_THROW(multi_similarity_miner(Matrix(2, 2, 1.0), LabelVector({0, 1}), cfg), ConfigError);
}

TEST(MinerProperties, AgreesWithBruteForce) {
  std::mt19937_64 gen(3);
  const std::vector<DistanceKind> kinds = {DistanceKind::cosine(), DistanceKind::lp(2.0),
                                           DistanceKind::dot_product(), DistanceKind::snr()};
  std::uniform_int_distribution<std::size_t> size(2, 16);
  std::uniform_real_distribution<double> eps(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(gen);
    const auto labels = random_labels(gen, n, 1 + trial % 4);
    const Matrix x = oracle::random_matrix(n, 3, gen);
    MinerConfig cfg;
    cfg.distance = kinds[trial % kinds.size()];
    cfg.epsilon = eps(gen);
    const TupleSet t = multi_similarity_miner(x, LabelVector(labels), cfg);
    const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
    const oracle::MinedPairs expected =
        oracle::brute_force_miner(table(m), labels, cfg.epsilon, m.inverted);
    EXPECT_EQ(as_set(t.pos_pairs), expected.pos);
    EXPECT_EQ(as_set(t.neg_pairs), expected.neg);
    EXPECT_TRUE(std::is_sorted(t.pos_pairs.begin(), t.pos_pairs.end()));
    EXPECT_TRUE(std::is_sorted(t.neg_pairs.begin(), t.neg_pairs.end()));
    EXPECT_NO_THROW(t.validate(LabelVector(labels)));
  }
}

TEST(MinerProperties, SubsetOfAllPairsAndMonotoneInEpsilon) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + trial % 13;
    const auto labels = random_labels(gen, n, 3);
    const LabelVector y(labels);
    const Matrix x = oracle::random_matrix(n, 4, gen);
    const auto all = all_tuples(y, TupleArity::Pairs);
    const auto all_pos = as_set(all.pos_pairs);
    const auto all_neg = as_set(all.neg_pairs);
    std::set<oracle::Pair> prev_pos, prev_neg;
    for (double e : {0.0, 0.05, 0.1, 0.3, 1.0, 5.0}) {
      MinerConfig cfg;
      cfg.epsilon = e;
      cfg.distance = trial % 2 == 0 ? DistanceKind::cosine() : DistanceKind::lp(2.0);
      const TupleSet t = multi_similarity_miner(x, y, cfg);
      const auto pos = as_set(t.pos_pairs);
      const auto neg = as_set(t.neg_pairs);
      EXPECT_TRUE(std::includes(all_pos.begin(), all_pos.end(), pos.begin(), pos.end()));
      EXPECT_TRUE(std::includes(all_neg.begin(), all_neg.end(), neg.begin(), neg.end()));
      EXPECT_TRUE(std::includes(pos.begin(), pos.end(), prev_pos.begin(), prev_pos.end()));
      EXPECT_TRUE(std::includes(neg.begin(), neg.end(), prev_neg.begin(), prev_neg.end()));
      prev_pos = pos;
      prev_neg = neg;
    }
  }
}

TEST(Conversion, PairsToTripletsSharedAnchor) {
  TupleSet t;
  t.pos_pairs = {{0, 1}};
  t.neg_pairs = {{0, 2}, {0, 3}, {1, 2}};
  const TupleSet out = pairs_to_triplets(t);
  EXPECT_EQ(out.arity, TupleArity::Triplets);
  EXPECT_EQ(out.triplets, (std::vector<IndexTriplet>{{0, 1, 2}, {0, 1, 3}}));
  EXPECT_TRUE(out.pos_pairs.empty());
}

TEST(Conversion, PairsToTripletsEmptyCases) {
  TupleSet no_pos;
  no_pos.neg_pairs = {{0, 2}};
  EXPECT_TRUE(pairs_to_triplets(no_pos).triplets.empty());
  TupleSet disjoint;
  disjoint.pos_pairs = {{0, 1}};
  disjoint.neg_pairs = {{2, 3}};
  EXPECT_TRUE(pairs_to_triplets(disjoint).triplets.empty());
}

TEST(Conversion, TripletsToPairs) {
  TupleSet one;
  one.arity = TupleArity::Triplets;
  one.triplets = {{0, 1, 2}};
  TupleSet out = triplets_to_pairs(one);
  EXPECT_EQ(out.arity, TupleArity::Pairs);
  EXPECT_EQ(out.pos_pairs, (std::vector<IndexPair>{{0, 1}}));
  EXPECT_EQ(out.neg_pairs, (std::vector<IndexPair>{{0, 2}}));

  TupleSet two;
  two.arity = TupleArity::Triplets;
  two.triplets = {{0, 1, 2}, {0, 1, 3}};
  out = triplets_to_pairs(two);
  EXPECT_EQ(out.pos_pairs, (std::vector<IndexPair>{{0, 1}, {0, 1}}));
  EXPECT_EQ(out.neg_pairs, (std::vector<IndexPair>{{0, 2}, {0, 3}}));

  TupleSet none;
  none.arity = TupleArity::Triplets;
  EXPECT_TRUE(triplets_to_pairs(none).empty());
}

TEST(Conversion, RoundTripRegeneratesTriplets) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto labels = random_labels(gen, 8, 3);
    const TupleSet all = all_tuples(LabelVector(labels), TupleArity::Triplets);
    TupleSet sample;
    sample.arity = TupleArity::Triplets;
    for (const auto& tr : all.triplets) {
      if (gen() % 3 == 0) sample.triplets.push_back(tr);
    }
    const TupleSet back = pairs_to_triplets(triplets_to_pairs(sample));
    const std::set<IndexTriplet> regenerated(back.triplets.begin(), back.triplets.end());
    for (const auto& tr : sample.triplets) EXPECT_TRUE(regenerated.count(tr));
  }
}

TEST(FrequencyWeights, HandCounts) {
  TupleSet tri;
  tri.arity = TupleArity::Triplets;
  tri.triplets = {{0, 1, 2}};
  EXPECT_EQ(tuple_frequency_weights(tri, 4), (std::vector<double>{1, 1, 1, 0}));

  EXPECT_EQ(tuple_frequency_weights(TupleSet{}, 3), (std::vector<double>{0, 0, 0}));

  TupleSet pairs;
  pairs.pos_pairs = {{0, 1}, {0, 2}};
  EXPECT_EQ(tuple_frequency_weights(pairs, 3), (std::vector<double>{1, 0.5, 0.5}));
}
