#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "mlkit/matrix.hpp"

namespace oracle {

using mlkit::Matrix;

// Central differences of f at x with the given step.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                double step = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = probe.data()[k];
    probe.data()[k] = keep + step;
    const double up = f(probe);
    probe.data()[k] = keep - step;
    const double down = f(probe);
    probe.data()[k] = keep;
    g.data()[k] = (up - down) / (2.0 * step);
  }
  return g;
}

// Largest componentwise relative error over components whose magnitude
// exceeds floor (in either argument).
inline double max_relative_error(const Matrix& analytic, const Matrix& numeric,
                                 double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double a = analytic.data()[k];
    const double b = numeric.data()[k];
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale <= floor) continue;
    worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen,
                            double dev = 1.0) {
  std::normal_distribution<double> dist(0.0, dev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(gen);
  return m;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

using Pair = std::pair<std::size_t, std::size_t>;

struct MinedPairs {
  std::set<Pair> pos;
  std::set<Pair> neg;
};

// Mining rule evaluated by explicit per-anchor enumeration over a
// precomputed value table; `similarity` selects the comparison direction.
inline MinedPairs brute_force_miner(const std::vector<std::vector<double>>& value,
                                    const std::vector<std::int64_t>& labels, double epsilon,
                                    bool similarity) {
  MinedPairs out;
  const std::size_t n = labels.size();
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<double> pos_vals, neg_vals;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      (labels[b] == labels[a] ? pos_vals : neg_vals).push_back(value[a][b]);
    }
    if (pos_vals.empty() || neg_vals.empty()) continue;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      const double v = value[a][b];
      if (labels[b] == labels[a]) {
        bool harder_than_some_negative = false;
        for (double nv : neg_vals) {
          if (similarity ? v < nv + epsilon : v > nv - epsilon) harder_than_some_negative = true;
        }
        if (harder_than_some_negative) out.pos.insert({a, b});
      } else {
        bool harder_than_some_positive = false;
        for (double pv : pos_vals) {
          if (similarity ? v > pv - epsilon : v < pv + epsilon) harder_than_some_positive = true;
        }
        if (harder_than_some_positive) out.neg.insert({a, b});
      }
    }
  }
  return out;
}

struct Retrieval {
  double precision_at_1 = 0.0;
  double r_precision = 0.0;
  double map_at_r = 0.0;
};

// Full ranking by Euclidean distance (index tie-break), self excluded.
inline Retrieval brute_force_retrieval(const Matrix& x, const std::vector<std::int64_t>& labels) {
  const std::size_t n = labels.size();
  Retrieval out;
  std::size_t queries = 0;
  for (std::size_t q = 0; q < n; ++q) {
    std::size_t relevant = 0;
    for (std::size_t r = 0; r < n; ++r) relevant += (r != q && labels[r] == labels[q]) ? 1 : 0;
    if (relevant == 0) continue;
    std::vector<std::tuple<double, std::size_t>> ranked;
    for (std::size_t r = 0; r < n; ++r) {
      if (r != q) ranked.emplace_back(euclidean(x.row(q), x.row(r)), r);
    }
    std::sort(ranked.begin(), ranked.end());
    ++queries;
    out.precision_at_1 += labels[std::get<1>(ranked[0])] == labels[q] ? 1.0 : 0.0;
    double hits = 0.0;
    double ap = 0.0;
    for (std::size_t i = 0; i < relevant; ++i) {
      if (labels[std::get<1>(ranked[i])] == labels[q]) {
        hits += 1.0;
        ap += hits / static_cast<double>(i + 1);
      }
    }
    out.r_precision += hits / static_cast<double>(relevant);
    out.map_at_r += ap / static_cast<double>(relevant);
  }
  if (queries > 0) {
    out.precision_at_1 /= static_cast<double>(queries);
    out.r_precision /= static_cast<double>(queries);
    out.map_at_r /= static_cast<double>(queries);
  }
  return out;
}

// MI by looping over every pair of label values and counting samples directly.
inline double mutual_information(const std::vector<std::int64_t>& u,
                                 const std::vector<std::int64_t>& v) {
  const double n = static_cast<double>(u.size());
  const std::set<std::int64_t> us(u.begin(), u.end());
  const std::set<std::int64_t> vs(v.begin(), v.end());
  double mi = 0.0;
  for (std::int64_t a : us) {
    for (std::int64_t b : vs) {
      double joint = 0.0, pa = 0.0, pb = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        joint += (u[i] == a && v[i] == b) ? 1.0 : 0.0;
        pa += u[i] == a ? 1.0 : 0.0;
        pb += v[i] == b ? 1.0 : 0.0;
      }
      if (joint == 0.0) continue;
      mi += (joint / n) * std::log((joint / n) / ((pa / n) * (pb / n)));
    }
  }
  return mi;
}

}  // namespace oracle
