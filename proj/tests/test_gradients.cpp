#include <gtest/gtest.h>

#include "gradient_cases.hpp"
#include "mlkit/losses.hpp"

using namespace mlkit;

namespace {

constexpr double kTolerance = 1e-4;

class LossGradients : public ::testing::TestWithParam<LossName> {};

}  // namespace

TEST_P(LossGradients, MatchFiniteDifferencesOverSeeds) {
  const LossConfig cfg = oracle::suite_config(GetParam());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const oracle::GradientResult r = oracle::check_gradients(cfg, seed);
    EXPECT_LE(r.embedding_error, kTolerance) << "seed " << seed;
    EXPECT_LE(r.weight_error, kTolerance) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllLosses, LossGradients,
                         ::testing::Values(LossName::TripletMargin, LossName::Contrastive,
                                           LossName::NTXent, LossName::MultiSimilarity,
                                           LossName::Circle, LossName::ArcFace),
                         [](const auto& info) { return to_string(info.param); });

TEST(LossGradientVariants, ArcFaceDefaultScaleOnResolvableComponents) {
  const LossConfig cfg = LossConfig::defaults(LossName::ArcFace);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const oracle::GradientResult r = oracle::check_gradients(cfg, seed, 1e-5, 1e-5);
    EXPECT_LE(r.embedding_error, kTolerance) << "seed " << seed;
    EXPECT_LE(r.weight_error, kTolerance) << "seed " << seed;
  }
}

TEST(LossGradientVariants, OtherDistancesAndReducers) {
  std::vector<LossConfig> configs;
  LossConfig triplet_cos = LossConfig::defaults(LossName::TripletMargin);
  triplet_cos.distance = DistanceKind::cosine();
  triplet_cos.hyperparameters["margin"] = 0.2;
  configs.push_back(triplet_cos);

  LossConfig triplet_snr = LossConfig::defaults(LossName::TripletMargin);
  triplet_snr.distance = DistanceKind::snr();
  triplet_snr.reducer.base = ReducerRule::sum();
  configs.push_back(triplet_snr);

  LossConfig contrastive_dot = LossConfig::defaults(LossName::Contrastive);
  contrastive_dot.distance = DistanceKind::dot_product();
  contrastive_dot.hyperparameters = {{"pos_margin", 0.5}, {"neg_margin", 0.0}};
  configs.push_back(contrastive_dot);

  LossConfig ntxent_l2 = LossConfig::defaults(LossName::NTXent);
  ntxent_l2.distance = DistanceKind::lp(2.0);
  ntxent_l2.hyperparameters["temperature"] = 0.5;
  configs.push_back(ntxent_l2);

  LossConfig ms_reg = LossConfig::defaults(LossName::MultiSimilarity);
  ms_reg.embedding_regularizer = RegularizerKind::lp(2.0, 2);
  ms_reg.embedding_reg_weight = 0.3;
  configs.push_back(ms_reg);

  LossConfig arc_dot = LossConfig::defaults(LossName::ArcFace);
  arc_dot.distance = DistanceKind::dot_product();
  arc_dot.hyperparameters = {{"margin", 0.3}, {"scale", 8.0}};
  arc_dot.weight_regularizer = RegularizerKind::regular_face();
  arc_dot.weight_reg_weight = 0.5;
  configs.push_back(arc_dot);

  for (const LossConfig& cfg : configs) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const oracle::GradientResult r = oracle::check_gradients(cfg, 1000 + seed);
      EXPECT_LE(r.embedding_error, kTolerance) << to_string(cfg.name) << " seed " << seed;
      EXPECT_LE(r.weight_error, kTolerance) << to_string(cfg.name) << " seed " << seed;
    }
  }
}
