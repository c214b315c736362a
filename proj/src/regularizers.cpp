#include "mlkit/regularizers.hpp"

#include <cmath>
#include <limits>

namespace mlkit {

RegularizerKind RegularizerKind::lp(double p, int power) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("Lp regularizer requires p >= 1");
  if (power < 1) throw ConfigError("Lp regularizer requires power >= 1");
  return {Type::Lp, p, power};
}

namespace {

double lp_norm(std::span<const double> v, double p) {
  double s = 0.0;
  if (p == 2.0) return l2_norm(v);
  if (p == 1.0) {
    for (double x : v) s += std::abs(x);
    return s;
  }
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Index of the most similar other row, lowest index on ties.
std::size_t closest_other(const Matrix& normalized, std::size_t i, double* best_out) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = i;
  for (std::size_t j = 0; j < normalized.rows(); ++j) {
    if (j == i) continue;
    const double c = dot(normalized.row(i), normalized.row(j));
    if (c > best) {
      best = c;
      arg = j;
    }
  }
  *best_out = best;
  return arg;
}

void check_regular_face(const Matrix& w) {
  if (w.rows() < 2) throw PreconditionError("RegularFace needs at least two classes");
  for (std::size_t i = 0; i < w.rows(); ++i) {
    if (l2_norm(w.row(i)) < kDefaultEps) {
      throw DegenerateWeights("class weight row " + std::to_string(i) + " has near-zero norm");
    }
  }
}

}  // namespace

LossBundle lp_embedding_regularizer(const Matrix& x, double p, int power) {
  LossBundle b;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    b.per_element.push(std::pow(lp_norm(x.row(i), p), power), i);
  }
  return b;
}

LossBundle regular_face_regularizer(const Matrix& weights) {
  check_regular_face(weights);
  const Matrix wn = l2_normalize_rows(weights);
  LossBundle b;
  for (std::size_t i = 0; i < wn.rows(); ++i) {
    double best = 0.0;
    closest_other(wn, i, &best);
    b.per_element.push(best, i);
  }
  return b;
}

LossBundle apply_regularizer(const RegularizerKind& kind, const Matrix& rows) {
  if (kind.type == RegularizerKind::Type::Lp) {
    return lp_embedding_regularizer(rows, kind.p, kind.power);
  }
  return regular_face_regularizer(rows);
}

Matrix regularizer_backward(const RegularizerKind& kind, const Matrix& rows,
                            const std::vector<double>& coeffs) {
  Matrix g(rows.rows(), rows.cols());
  if (kind.type == RegularizerKind::Type::Lp) {
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      const double c = coeffs[i];
      if (c == 0.0) continue;
      auto r = rows.row(i);
      const double norm = lp_norm(r, kind.p);
      if (norm == 0.0) continue;
      // d(norm^power) = power * norm^(power-1) * d(norm)
      const double outer = kind.power * std::pow(norm, kind.power - 1);
      for (std::size_t k = 0; k < r.size(); ++k) {
        double dnorm;
        if (kind.p == 1.0) {
          dnorm = sign(r[k]);
        } else if (kind.p == 2.0) {
          dnorm = r[k] / norm;
        } else {
          dnorm = sign(r[k]) * std::pow(std::abs(r[k]), kind.p - 1.0) *
                  std::pow(norm, 1.0 - kind.p);
        }
        g(i, k) += c * outer * dnorm;
      }
    }
    return g;
  }

  check_regular_face(rows);
  const Matrix wn = l2_normalize_rows(rows);
  std::vector<double> norms(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) norms[i] = l2_norm(rows.row(i));
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;
    double s = 0.0;
    const std::size_t j = closest_other(wn, i, &s);
    for (std::size_t k = 0; k < rows.cols(); ++k) {
      g(i, k) += c * (wn(j, k) - s * wn(i, k)) / norms[i];
      g(j, k) += c * (wn(i, k) - s * wn(j, k)) / norms[j];
    }
  }
  return g;
}

}  // namespace mlkit
