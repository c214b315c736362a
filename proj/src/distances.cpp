#include "mlkit/distances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mlkit {

DistanceKind DistanceKind::lp(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw ConfigError("Lp distance requires finite p >= 1");
  }
  return {Type::Lp, p};
}

DistanceKind DistanceKind::parse(std::string_view name) {
  if (name == "euclidean" || name == "lp2" || name == "l2") return lp(2.0);
  if (name == "lp1" || name == "l1" || name == "manhattan") return lp(1.0);
  if (name == "cosine") return cosine();
  if (name == "dot") return dot_product();
  if (name == "snr") return snr();
  if (name.starts_with("lp:")) {
    double p = 0.0;
    auto rest = name.substr(3);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), p);
    if (ec == std::errc() && ptr == rest.data() + rest.size()) return lp(p);
  }
  throw ConfigError("unknown distance '" + std::string(name) + "'");
}

std::string DistanceKind::name() const {
  switch (type) {
    case Type::Lp: {
      if (p == 2.0) return "euclidean";
      if (p == 1.0) return "lp1";
      std::ostringstream os;
      os << "lp:" << p;
      return os.str();
    }
    case Type::CosineSimilarity:
      return "cosine";
    case Type::DotProductSimilarity:
      return "dot";
    case Type::SNR:
      break;
  }
  return "snr";
}

bool is_inverted(const DistanceKind& kind) {
  return kind.type == DistanceKind::Type::CosineSimilarity ||
         kind.type == DistanceKind::Type::DotProductSimilarity;
}

double coordinate_variance(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / n;
}

namespace {

double lp_distance(std::span<const double> a, std::span<const double> b, double p) {
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }
  if (p == 1.0) {
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s;
  }
  for (std::size_t k = 0; k < a.size(); ++k) s += std::pow(std::abs(a[k] - b[k]), p);
  return std::pow(s, 1.0 / p);
}

// Var(b - a) without allocating.
double difference_variance(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) mean += b[k] - a[k];
  mean /= n;
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double u = (b[k] - a[k]) - mean;
    ss += u * u;
  }
  return ss / n;
}

void check_dims(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw DimensionMismatch("distance operands have " + std::to_string(x.cols()) + " and " +
                            std::to_string(y.cols()) + " columns");
  }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// d M_ij / d x_i for Lp, given diff = x_i - y_j and the distance value.
double lp_partial(double diff, double dist, double p) {
  if (p == 1.0) return sign(diff);
  if (dist == 0.0) return 0.0;
  if (p == 2.0) return diff / dist;
  return sign(diff) * std::pow(std::abs(diff), p - 1.0) * std::pow(dist, 1.0 - p);
}

}  // namespace

DistanceMatrix pairwise_matrix(const DistanceKind& kind, const Matrix& x, const Matrix& y) {
  check_dims(x, y);
  const std::size_t n = x.rows();
  const std::size_t m = y.rows();
  const long long rows = static_cast<long long>(n);
  DistanceMatrix out{Matrix(n, m), is_inverted(kind), kind};
  Matrix& values = out.values;

  switch (kind.type) {
    case DistanceKind::Type::Lp: {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) values(i, j) = lp_distance(x.row(i), y.row(j), kind.p);
      }
      break;
    }
    case DistanceKind::Type::CosineSimilarity: {
      const Matrix xn = l2_normalize_rows(x);
      const Matrix yn = l2_normalize_rows(y);
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) values(i, j) = dot(xn.row(i), yn.row(j));
      }
      break;
    }
    case DistanceKind::Type::DotProductSimilarity: {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) values(i, j) = dot(x.row(i), y.row(j));
      }
      break;
    }
    case DistanceKind::Type::SNR: {
      std::vector<double> denom(n);
      for (std::size_t i = 0; i < n; ++i) {
        denom[i] = std::max(coordinate_variance(x.row(i)), kDefaultEps);
      }
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          values(i, j) = difference_variance(x.row(i), y.row(j)) / denom[i];
        }
      }
      break;
    }
  }
  return out;
}

DistanceMatrix pairwise_matrix(const DistanceKind& kind, const EmbeddingBatch& x,
                               const EmbeddingBatch& y) {
  return pairwise_matrix(kind, x.values(), y.values());
}

PairwiseGradients pairwise_backward(const DistanceKind& kind, const Matrix& x,
                                    const Matrix& y, const Matrix& d_matrix) {
  check_dims(x, y);
  const std::size_t n = x.rows();
  const std::size_t m = y.rows();
  const std::size_t d = x.cols();
  if (d_matrix.rows() != n || d_matrix.cols() != m) {
    throw DimensionMismatch("pairwise_backward: upstream gradient has the wrong shape");
  }
  PairwiseGradients g{Matrix(n, d), Matrix(m, d)};
  const long long n_rows = static_cast<long long>(n);
  const long long m_rows = static_cast<long long>(m);

  switch (kind.type) {
    case DistanceKind::Type::Lp: {
      const Matrix dist = pairwise_matrix(kind, x, y).values;
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n_rows; ++i) {
        auto gx = g.d_x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < d; ++k) {
            gx[k] += w * lp_partial(x(i, k) - y(j, k), dist(i, j), kind.p);
          }
        }
      }
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < m_rows; ++j) {
        auto gy = g.d_y.row(j);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < d; ++k) {
            gy[k] -= w * lp_partial(x(i, k) - y(j, k), dist(i, j), kind.p);
          }
        }
      }
      break;
    }
    case DistanceKind::Type::DotProductSimilarity: {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n_rows; ++i) {
        auto gx = g.d_x.row(i);
        for (std::size_t j = 0; j < m; ++j) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < d; ++k) gx[k] += w * y(j, k);
        }
      }
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < m_rows; ++j) {
        auto gy = g.d_y.row(j);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          for (std::size_t k = 0; k < d; ++k) gy[k] += w * x(i, k);
        }
      }
      break;
    }
    case DistanceKind::Type::CosineSimilarity: {
      // d(x_hat . y_hat)/dx = (y_hat - s x_hat) / |x|, or y_hat / eps on the floor.
      const Matrix xn = l2_normalize_rows(x);
      const Matrix yn = l2_normalize_rows(y);
      std::vector<double> x_norm(n), y_norm(m);
      for (std::size_t i = 0; i < n; ++i) x_norm[i] = l2_norm(x.row(i));
      for (std::size_t j = 0; j < m; ++j) y_norm[j] = l2_norm(y.row(j));
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n_rows; ++i) {
        auto gx = g.d_x.row(i);
        const bool floored = x_norm[i] < kDefaultEps;
        const double scale = floored ? kDefaultEps : x_norm[i];
        for (std::size_t j = 0; j < m; ++j) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          const double s = dot(xn.row(i), yn.row(j));
          for (std::size_t k = 0; k < d; ++k) {
            const double radial = floored ? 0.0 : s * xn(i, k);
            gx[k] += w * (yn(j, k) - radial) / scale;
          }
        }
      }
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < m_rows; ++j) {
        auto gy = g.d_y.row(j);
        const bool floored = y_norm[j] < kDefaultEps;
        const double scale = floored ? kDefaultEps : y_norm[j];
        for (std::size_t i = 0; i < n; ++i) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          const double s = dot(xn.row(i), yn.row(j));
          for (std::size_t k = 0; k < d; ++k) {
            const double radial = floored ? 0.0 : s * yn(j, k);
            gy[k] += w * (xn(i, k) - radial) / scale;
          }
        }
      }
      break;
    }
    case DistanceKind::Type::SNR: {
      // M = V(u)/V(x), u = y - x, dV(v)/dv_k = 2 (v_k - mean(v)) / d.
      const double dd = static_cast<double>(d);
      std::vector<double> x_var(n), x_mean(n);
      for (std::size_t i = 0; i < n; ++i) {
        x_var[i] = coordinate_variance(x.row(i));
        double mu = 0.0;
        for (double v : x.row(i)) mu += v;
        x_mean[i] = mu / dd;
      }
      auto pair_terms = [&](std::size_t i, std::size_t j, std::vector<double>& du) {
        double mu = 0.0;
        for (std::size_t k = 0; k < d; ++k) mu += y(j, k) - x(i, k);
        mu /= dd;
        const double denom = std::max(x_var[i], kDefaultEps);
        for (std::size_t k = 0; k < d; ++k) {
          du[k] = 2.0 * ((y(j, k) - x(i, k)) - mu) / (dd * denom);
        }
        return difference_variance(x.row(i), y.row(j));
      };
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n_rows; ++i) {
        std::vector<double> du(d);
        auto gx = g.d_x.row(i);
        const bool floored = x_var[i] < kDefaultEps;
        for (std::size_t j = 0; j < m; ++j) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          const double u_var = pair_terms(i, j, du);
          for (std::size_t k = 0; k < d; ++k) {
            double g_k = -du[k];
            if (!floored) {
              g_k -= u_var / (x_var[i] * x_var[i]) * 2.0 * (x(i, k) - x_mean[i]) / dd;
            }
            gx[k] += w * g_k;
          }
        }
      }
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < m_rows; ++j) {
        std::vector<double> du(d);
        auto gy = g.d_y.row(j);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = d_matrix(i, j);
          if (w == 0.0) continue;
          pair_terms(i, j, du);
          for (std::size_t k = 0; k < d; ++k) gy[k] += w * du[k];
        }
      }
      break;
    }
  }
  return g;
}

Matrix pairwise_backward_self(const DistanceKind& kind, const Matrix& x,
                              const Matrix& d_matrix) {
  PairwiseGradients g = pairwise_backward(kind, x, x, d_matrix);
  g.d_x += g.d_y;
  return std::move(g.d_x);
}

std::string to_string(LossName name) {
  switch (name) {
    case LossName::TripletMargin:
      return "TripletMargin";
    case LossName::Contrastive:
      return "Contrastive";
    case LossName::NTXent:
      return "NTXent";
    case LossName::MultiSimilarity:
      return "MultiSimilarity";
    case LossName::Circle:
      return "Circle";
    case LossName::ArcFace:
      break;
  }
  return "ArcFace";
}

LossName parse_loss_name(std::string_view name) {
  for (LossName l : {LossName::TripletMargin, LossName::Contrastive, LossName::NTXent,
                     LossName::MultiSimilarity, LossName::Circle, LossName::ArcFace}) {
    if (to_string(l) == name) return l;
  }
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

void check_distance_compatibility(LossName loss, const DistanceKind& kind) {
  switch (loss) {
    case LossName::TripletMargin:
    case LossName::Contrastive:
    case LossName::NTXent:
      return;
    case LossName::MultiSimilarity:
    case LossName::Circle:
      if (!is_inverted(kind)) {
        throw IncompatibleDistance(to_string(loss) +
                                   " requires a similarity (inverted) distance, got " +
                                   kind.name());
      }
      return;
    case LossName::ArcFace:
      if (kind.type != DistanceKind::Type::CosineSimilarity &&
          kind.type != DistanceKind::Type::DotProductSimilarity) {
        throw IncompatibleDistance(
            "ArcFace only accepts CosineSimilarity or DotProductSimilarity, got " +
            kind.name());
      }
      return;
  }
}

}  // namespace mlkit
