#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mlkit/core.hpp"
#include "mlkit/errors.hpp"
#include "mlkit/rng.hpp"
#include "oracles.hpp"

using namespace mlkit;

TEST(ValidateBatch, AcceptsConsistentShapes) {
  Matrix x(4, 2, 1.0);
  LabelVector y({0, 1, 0, 1});
  EXPECT_NO_THROW(validate_batch(x, y));
}

TEST(ValidateBatch, RejectsLengthMismatch) {
  Matrix x(4, 2, 1.0);
  LabelVector y({0, 1, 0});
  EXPECT_THROW(validate_batch(x, y), ShapeMismatch);
}

TEST(ValidateBatch, RejectsNaN) {
  Matrix x(4, 2, 1.0);
  x(2, 1) = std::numeric_limits<double>::quiet_NaN();
  LabelVector y({0, 1, 0, 1});
  EXPECT_THROW(validate_batch(x, y), NonFiniteInput);
}

TEST(ValidateBatch, RejectsInfinity) {
  Matrix x(2, 2, 1.0);
  x(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(EmbeddingBatch{x}, NonFiniteInput);
}

TEST(EmbeddingBatch, RejectsEmpty) {
  EXPECT_THROW(EmbeddingBatch{Matrix(0, 3)}, ShapeMismatch);
  EXPECT_THROW(EmbeddingBatch{Matrix(3, 0)}, ShapeMismatch);
}

TEST(LabelVector, CanonicalizesSparseIds) {
  LabelVector y({7, 3, 7, 42});
  EXPECT_EQ(y.num_classes(), 3u);
  EXPECT_EQ(y.canonical(0), 1u);
  EXPECT_EQ(y.canonical(1), 0u);
  EXPECT_EQ(y.canonical(3), 2u);
  EXPECT_EQ(y.original_id(2), 42);
  const LabelVector sub = y.subset({3, 0});
  EXPECT_EQ(sub[0], 42);
  EXPECT_EQ(sub.num_classes(), 2u);
}

TEST(LabelVector, RejectsNegativeLabels) { EXPECT_THROW(LabelVector({0, -1}), Error); }

TEST(Normalize, ThreeFourFive) {
  const Matrix out = l2_normalize_rows(Matrix{{3, 4}});
  EXPECT_DOUBLE_EQ(out(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(out(0, 1), 0.8);
}

TEST(Normalize, UnitRowUnchanged) {
  const double s = 1.0 / std::sqrt(2.0);
  const Matrix out = l2_normalize_rows(Matrix{{s, s}, {1, 0}});
  EXPECT_NEAR(out(0, 0), s, 1e-12);
  EXPECT_NEAR(out(0, 1), s, 1e-12);
  EXPECT_EQ(out(1, 0), 1.0);
}

TEST(Normalize, ZeroRowStaysZero) {
  const Matrix out = l2_normalize_rows(Matrix{{0, 0}}, 1e-8);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
}

TEST(Normalize, TinyRowDividedByEps) {
  const Matrix out = l2_normalize_rows(Matrix{{1e-9, 0}}, 1e-8);
  EXPECT_NEAR(out(0, 0), 0.1, 1e-15);
}

TEST(Normalize, IdempotentOnRandomRows) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = oracle::random_matrix(6, 5, gen, 3.0);
    const Matrix once = l2_normalize_rows(x);
    const Matrix twice = l2_normalize_rows(once);
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_NEAR(once.data()[k], twice.data()[k], 1e-12);
    }
    for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_NEAR(l2_norm(once.row(i)), 1.0, 1e-12);
  }
}

TEST(TupleSet, ValidateChecksLabelsAndArity) {
  LabelVector y({0, 0, 1});
  TupleSet ok;
  ok.pos_pairs = {{0, 1}};
  ok.neg_pairs = {{0, 2}};
  EXPECT_NO_THROW(ok.validate(y));

  TupleSet bad_pos = ok;
  bad_pos.pos_pairs = {{0, 2}};
  EXPECT_THROW(bad_pos.validate(y), Error);

  TupleSet self_pair = ok;
  self_pair.pos_pairs = {{1, 1}};
  EXPECT_THROW(self_pair.validate(y), Error);

  TupleSet mixed = ok;
  mixed.triplets = {{0, 1, 2}};
  EXPECT_THROW(mixed.validate(y), Error);

  TupleSet out_of_range;
  out_of_range.arity = TupleArity::Triplets;
  out_of_range.triplets = {{0, 1, 3}};
  EXPECT_THROW(out_of_range.validate(y), Error);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.below(17), b.below(17));
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(Rng, DrawsStayInRange) {
  Rng r(9);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(3), 3u);
    sum += r.normal();
  }
  EXPECT_NEAR(sum / 20000.0, 0.0, 0.05);
}
