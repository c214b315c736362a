#include "mlkit/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mlkit::reference {

namespace {

std::vector<double> normalized(std::span<const double> v) {
  const double denom = std::max(l2_norm(v), kDefaultEps);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= denom;
  return out;
}

double pair_value(const DistanceKind& kind, std::span<const double> a,
                  std::span<const double> b) {
  const std::size_t d = a.size();
  switch (kind.type) {
    case DistanceKind::Type::Lp: {
      double s = 0.0;
      if (kind.p == 2.0) {
        for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        return std::sqrt(s);
      }
      if (kind.p == 1.0) {
        for (std::size_t k = 0; k < d; ++k) s += std::abs(a[k] - b[k]);
        return s;
      }
      for (std::size_t k = 0; k < d; ++k) s += std::pow(std::abs(a[k] - b[k]), kind.p);
      return std::pow(s, 1.0 / kind.p);
    }
    case DistanceKind::Type::CosineSimilarity:
      return dot(normalized(a), normalized(b));
    case DistanceKind::Type::DotProductSimilarity:
      return dot(a, b);
    case DistanceKind::Type::SNR: {
      std::vector<double> u(d);
      for (std::size_t k = 0; k < d; ++k) u[k] = b[k] - a[k];
      return coordinate_variance(u) / std::max(coordinate_variance(a), kDefaultEps);
    }
  }
  return 0.0;
}

}  // namespace

DistanceMatrix pairwise_matrix(const DistanceKind& kind, const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw DimensionMismatch("distance operands differ in width");
  DistanceMatrix out{Matrix(x.rows(), y.rows()), is_inverted(kind), kind};
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) out.values(i, j) = pair_value(kind, x.row(i), y.row(j));
  }
  return out;
}

PairwiseGradients pairwise_backward(const DistanceKind& kind, const Matrix& x,
                                    const Matrix& y, const Matrix& d_matrix) {
  // Central differences of each pair value; slow but independent of the
  // analytic partials.
  const double h = 1e-6;
  PairwiseGradients g{Matrix(x.rows(), x.cols()), Matrix(y.rows(), y.cols())};
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const double w = d_matrix(i, j);
      if (w == 0.0) continue;
      a.assign(x.row(i).begin(), x.row(i).end());
      b.assign(y.row(j).begin(), y.row(j).end());
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const double keep_a = a[k];
        a[k] = keep_a + h;
        const double up = pair_value(kind, a, b);
        a[k] = keep_a - h;
        const double down = pair_value(kind, a, b);
        a[k] = keep_a;
        g.d_x(i, k) += w * (up - down) / (2.0 * h);

        const double keep_b = b[k];
        b[k] = keep_b + h;
        const double up_b = pair_value(kind, a, b);
        b[k] = keep_b - h;
        const double down_b = pair_value(kind, a, b);
        b[k] = keep_b;
        g.d_y(j, k) += w * (up_b - down_b) / (2.0 * h);
      }
    }
  }
  return g;
}

std::vector<std::vector<std::size_t>> knn(const Matrix& query, const Matrix& reference,
                                          std::size_t k, const DistanceKind& kind,
                                          bool exclude_self) {
  const DistanceMatrix m = reference::pairwise_matrix(kind, query, reference);
  std::vector<std::vector<std::size_t>> out(query.rows());
  for (std::size_t q = 0; q < query.rows(); ++q) {
    std::vector<std::size_t> idx(reference.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (exclude_self) idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(q));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return m.inverted ? m(q, a) > m(q, b) : m(q, a) < m(q, b);
    });
    if (k > idx.size()) throw KTooLarge("k exceeds the available references");
    idx.resize(k);
    out[q] = std::move(idx);
  }
  return out;
}

std::vector<std::size_t> assign_clusters(const Matrix& x, const Matrix& centers) {
  std::vector<std::size_t> labels(x.rows(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += (x(i, k) - centers(c, k)) * (x(i, k) - centers(c, k));
      if (s < best) {
        best = s;
        labels[i] = c;
      }
    }
  }
  return labels;
}

}  // namespace mlkit::reference
