#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mlkit/errors.hpp"
#include "mlkit/reducers.hpp"
#include "mlkit/regularizers.hpp"
#include "oracles.hpp"

using namespace mlkit;

TEST(LpRegularizer, HandValues) {
  const Matrix x{{3, 4}, {0, 0}, {1, 1}};
  const LossBundle l2 = lp_embedding_regularizer(x, 2.0, 1);
  ASSERT_EQ(l2.per_element.size(), 3u);
  EXPECT_DOUBLE_EQ(l2.per_element.values[0], 5.0);
  EXPECT_EQ(l2.per_element.values[1], 0.0);
  const LossBundle l1sq = lp_embedding_regularizer(x, 1.0, 2);
  EXPECT_DOUBLE_EQ(l1sq.per_element.values[2], 4.0);
  EXPECT_EQ(l1sq.per_element.indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(LpRegularizer, RejectsBadParameters) {
  EXPECT_THROW(RegularizerKind::lp(0.5, 1), ConfigError);
  EXPECT_THROW(RegularizerKind::lp(2.0, 0), ConfigError);
}

TEST(LpRegularizer, RotationInvariant) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = oracle::random_matrix(5, 2, gen);
    const double t = angle(gen);
    Matrix r(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
      r(i, 0) = std::cos(t) * x(i, 0) - std::sin(t) * x(i, 1);
      r(i, 1) = std::sin(t) * x(i, 0) + std::cos(t) * x(i, 1);
    }
    const auto a = lp_embedding_regularizer(x, 2.0, 1).per_element.values;
    const auto b = lp_embedding_regularizer(r, 2.0, 1).per_element.values;
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(RegularFace, Orthogonal) {
  const LossBundle b = regular_face_regularizer(Matrix{{1, 0}, {0, 1}});
  EXPECT_EQ(b.per_element.values, (std::vector<double>{0, 0}));
  EXPECT_EQ(reduce(b, ReducerKind{}), 0.0);
}

TEST(RegularFace, Parallel) {
  const LossBundle b = regular_face_regularizer(Matrix{{2, 1}, {4, 2}});
  EXPECT_NEAR(b.per_element.values[0], 1.0, 1e-15);
  EXPECT_NEAR(reduce(b, ReducerKind{}), 1.0, 1e-15);
}

TEST(RegularFace, ThreeRows) {
  const double s = 1.0 / std::sqrt(2.0);
  const LossBundle b = regular_face_regularizer(Matrix{{1, 0}, {0, 1}, {s, s}});
  for (double v : b.per_element.values) EXPECT_NEAR(v, s, 1e-12);
  EXPECT_NEAR(reduce(b, ReducerKind{}), 0.7071067811865476, 1e-12);
}

TEST(RegularFace, Errors) {
  EXPECT_THROW(regular_face_regularizer(Matrix{{1, 0}}), Error);
  EXPECT_THROW(regular_face_regularizer(Matrix{{1, 0}, {0, 0}}), DegenerateWeights);
}

TEST(RegularFace, RangeAndRowScaleInvariance) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix w = oracle::random_matrix(4, 3, gen);
    const double before = reduce(regular_face_regularizer(w), ReducerKind{});
    EXPECT_GE(before, -1.0);
    EXPECT_LE(before, 1.0);
    const double c = scale(gen);
    for (double& v : w.row(trial % 4)) v *= c;
    EXPECT_NEAR(reduce(regular_face_regularizer(w), ReducerKind{}), before, 1e-12);
  }
}

TEST(RegularFace, NonNegativeCosinesGiveUnitInterval) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> pos(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix w(4, 3);
    for (double& v : w.data()) v = pos(gen);
    const double r = reduce(regular_face_regularizer(w), ReducerKind{});
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(RegularizerBackward, MatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  const std::vector<RegularizerKind> kinds = {RegularizerKind::lp(2.0, 1),
                                              RegularizerKind::lp(2.0, 2),
                                              RegularizerKind::lp(3.0, 1),
                                              RegularizerKind::regular_face()};
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = oracle::random_matrix(4, 3, gen);
    std::vector<double> coeffs{0.3, -1.2, 0.7, 2.0};
    for (const RegularizerKind& k : kinds) {
      auto f = [&](const Matrix& a) {
        const auto v = apply_regularizer(k, a).per_element.values;
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += coeffs[i] * v[i];
        return s;
      };
      const Matrix analytic = regularizer_backward(k, x, coeffs);
      const Matrix numeric = oracle::finite_difference(f, x);
      EXPECT_LT(oracle::max_relative_error(analytic, numeric), 1e-6);
    }
  }
}
