#include "mlkit/miners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlkit {

TupleSet all_tuples(const LabelVector& y, TupleArity arity) {
  const std::size_t n = y.size();
  TupleSet t;
  t.arity = arity;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      if (arity == TupleArity::Pairs) {
        if (y[a] == y[b]) {
          t.pos_pairs.push_back({a, b});
        } else {
          t.neg_pairs.push_back({a, b});
        }
      } else if (y[a] == y[b]) {
        for (std::size_t c = 0; c < n; ++c) {
          if (y[c] != y[a]) t.triplets.push_back({a, b, c});
        }
      }
    }
  }
  return t;
}

TupleSet multi_similarity_mine(const DistanceMatrix& m, const LabelVector& y, double epsilon) {
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw ConfigError("miner epsilon must be >= 0");
  }
  const std::size_t n = y.size();
  if (m.rows() != n || m.cols() != n) {
    throw ShapeMismatch("miner: distance matrix does not match label count");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  TupleSet t;
  t.arity = TupleArity::Pairs;
  for (std::size_t a = 0; a < n; ++a) {
    // Extremes over this anchor's positives and negatives.
    double pos_min = inf, pos_max = -inf, neg_min = inf, neg_max = -inf;
    bool has_pos = false, has_neg = false;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      const double v = m(a, b);
      if (y[b] == y[a]) {
        has_pos = true;
        pos_min = std::min(pos_min, v);
        pos_max = std::max(pos_max, v);
      } else {
        has_neg = true;
        neg_min = std::min(neg_min, v);
        neg_max = std::max(neg_max, v);
      }
    }
    if (!has_pos || !has_neg) continue;

    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      const double v = m(a, b);
      const bool positive = y[b] == y[a];
      bool keep;
      if (m.inverted) {
        keep = positive ? v < neg_max + epsilon : v > pos_min - epsilon;
      } else {
        keep = positive ? v > neg_min - epsilon : v < pos_max + epsilon;
      }
      if (!keep) continue;
      (positive ? t.pos_pairs : t.neg_pairs).push_back({a, b});
    }
  }
  return t;
}

TupleSet multi_similarity_miner(const Matrix& x, const LabelVector& y, const MinerConfig& cfg) {
  validate_batch(x, y);
  return multi_similarity_mine(pairwise_matrix(cfg.distance, x, x), y, cfg.epsilon);
}

TupleSet pairs_to_triplets(const TupleSet& t) {
  if (t.arity != TupleArity::Pairs) throw PreconditionError("pairs_to_triplets expects pairs");
  std::vector<IndexPair> pos = t.pos_pairs;
  std::vector<IndexPair> neg = t.neg_pairs;
  std::stable_sort(pos.begin(), pos.end());
  std::stable_sort(neg.begin(), neg.end());
  TupleSet out;
  out.arity = TupleArity::Triplets;
  auto neg_begin = neg.begin();
  for (const auto& [a, p] : pos) {
    neg_begin = std::lower_bound(neg_begin, neg.end(), IndexPair{a, 0});
    for (auto it = neg_begin; it != neg.end() && (*it)[0] == a; ++it) {
      out.triplets.push_back({a, p, (*it)[1]});
    }
  }
  return out;
}

TupleSet triplets_to_pairs(const TupleSet& t) {
  if (t.arity != TupleArity::Triplets) {
    throw PreconditionError("triplets_to_pairs expects triplets");
  }
  TupleSet out;
  out.arity = TupleArity::Pairs;
  out.pos_pairs.reserve(t.triplets.size());
  out.neg_pairs.reserve(t.triplets.size());
  for (const auto& [a, p, n] : t.triplets) {
    out.pos_pairs.push_back({a, p});
    out.neg_pairs.push_back({a, n});
  }
  return out;
}

std::vector<double> tuple_frequency_weights(const TupleSet& t, std::size_t n) {
  std::vector<double> counts(n, 0.0);
  auto bump = [&](std::size_t i) {
    if (i >= n) throw PreconditionError("tuple index out of range");
    counts[i] += 1.0;
  };
  for (const auto& pr : t.pos_pairs) std::for_each(pr.begin(), pr.end(), bump);
  for (const auto& pr : t.neg_pairs) std::for_each(pr.begin(), pr.end(), bump);
  for (const auto& tr : t.triplets) std::for_each(tr.begin(), tr.end(), bump);
  const double top = counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
  if (top == 0.0) return counts;
  for (double& c : counts) c /= top;
  return counts;
}

}  // namespace mlkit
