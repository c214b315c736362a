#pragma once

#include <vector>

#include "mlkit/core.hpp"

namespace mlkit {

struct RegularizerKind {
  enum class Type { Lp, RegularFace };

  Type type = Type::Lp;
  double p = 2.0;
  int power = 1;

  // Throws ConfigError unless p >= 1 and power >= 1.
  static RegularizerKind lp(double p = 2.0, int power = 1);
  static RegularizerKind regular_face() { return {Type::RegularFace, 2.0, 1}; }
};

// Per-row (||x_i||_p)^power as a per-element bundle.
LossBundle lp_embedding_regularizer(const Matrix& x, double p, int power);

// Per-class max_{j != i} cos(W_i, W_j). Requires C >= 2; throws
// DegenerateWeights if a row norm is below eps.
LossBundle regular_face_regularizer(const Matrix& weights);

LossBundle apply_regularizer(const RegularizerKind& kind, const Matrix& rows);

// sum_k coeffs[k] * d(value_k)/d(rows), one coefficient per bundle element.
Matrix regularizer_backward(const RegularizerKind& kind, const Matrix& rows,
                            const std::vector<double>& coeffs);

}  // namespace mlkit
