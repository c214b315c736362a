#pragma once

#include <string>
#include <string_view>

#include "mlkit/core.hpp"

namespace mlkit {

struct DistanceKind {
  enum class Type { Lp, CosineSimilarity, DotProductSimilarity, SNR };

  Type type = Type::Lp;
  double p = 2.0;  // Lp only

  static DistanceKind lp(double p = 2.0);
  static DistanceKind cosine() { return {Type::CosineSimilarity, 2.0}; }
  static DistanceKind dot_product() { return {Type::DotProductSimilarity, 2.0}; }
  static DistanceKind snr() { return {Type::SNR, 2.0}; }

  // Accepts "euclidean", "lp2", "lp1", "lp:<p>", "cosine", "dot", "snr".
  static DistanceKind parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const DistanceKind&, const DistanceKind&) = default;
};

// True when larger values mean more similar.
bool is_inverted(const DistanceKind& kind);

struct DistanceMatrix {
  Matrix values;
  bool inverted = false;
  DistanceKind kind;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

// M[i][j] = d(x_i, y_j). Rows are computed in parallel; the result is
// bit-identical to reference::pairwise_matrix. Throws DimensionMismatch.
DistanceMatrix pairwise_matrix(const DistanceKind& kind, const Matrix& x, const Matrix& y);
DistanceMatrix pairwise_matrix(const DistanceKind& kind, const EmbeddingBatch& x,
                               const EmbeddingBatch& y);

struct PairwiseGradients {
  Matrix d_x;
  Matrix d_y;
};

// Pulls dL/dM back to dL/dX and dL/dY. Non-differentiable points (zero Lp
// distance, |diff| = 0 under p = 1) take a zero subgradient.
PairwiseGradients pairwise_backward(const DistanceKind& kind, const Matrix& x,
                                    const Matrix& y, const Matrix& d_matrix);

// Same as pairwise_backward with Y = X, summing both contributions.
Matrix pairwise_backward_self(const DistanceKind& kind, const Matrix& x,
                              const Matrix& d_matrix);

enum class LossName { TripletMargin, Contrastive, NTXent, MultiSimilarity, Circle, ArcFace };

std::string to_string(LossName name);
LossName parse_loss_name(std::string_view name);

// Throws IncompatibleDistance when the loss does not support the kind.
void check_distance_compatibility(LossName loss, const DistanceKind& kind);

// Population variance over the coordinates of v.
double coordinate_variance(std::span<const double> v);

}  // namespace mlkit
