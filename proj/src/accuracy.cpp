#include "mlkit/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlkit/rng.hpp"

namespace mlkit {

namespace {

// Strict weak order on reference indices for one query row.
struct NeighborOrder {
  std::span<const double> row;
  bool inverted;
  bool operator()(std::size_t a, std::size_t b) const {
    if (row[a] != row[b]) return inverted ? row[a] > row[b] : row[a] < row[b];
    return a < b;
  }
};

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double total_wcss(const Matrix& x, const Matrix& centers, const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += squared_distance(x.row(i), centers.row(labels[i]));
  return s;
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t clusters, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centers(clusters, x.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < clusters; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double d : nearest) total += d;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          target -= nearest[i];
          if (target < 0.0 && nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        // All remaining points coincide with a center; take any unchosen one.
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) free.push_back(i);
        }
        pick = free[rng.below(free.size())];
      }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i), centers.row(c)));
    }
  }
  return centers;
}

// Moves the point farthest from its center into each empty cluster.
void repair_empty_clusters(const Matrix& x, Matrix& centers, std::vector<std::size_t>& labels) {
  const std::size_t k = centers.rows();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t l : labels) ++sizes[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    double worst = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = squared_distance(x.row(i), centers.row(labels[i]));
      if (d > worst) {
        worst = d;
        arg = i;
      }
    }
    --sizes[labels[arg]];
    labels[arg] = c;
    sizes[c] = 1;
    std::copy(x.row(arg).begin(), x.row(arg).end(), centers.row(c).begin());
  }
}

KMeansResult lloyd(const Matrix& x, Matrix centers, const KMeansConfig& cfg) {
  const std::size_t k = centers.rows();
  const std::size_t d = x.cols();
  KMeansResult res;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
    res.labels = assign_clusters(x, centers);
    repair_empty_clusters(x, centers, res.labels);
    const double current = total_wcss(x, centers, res.labels);
    if (current > previous + 1e-9 * std::max(1.0, std::abs(previous))) {
      throw std::logic_error("k-means: within-cluster sum of squares increased");
    }

    Matrix updated(k, d);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto dst = updated.row(res.labels[i]);
      auto src = x.row(i);
      for (std::size_t t = 0; t < d; ++t) dst[t] += src[t];
      ++sizes[res.labels[i]];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : updated.row(c)) v /= static_cast<double>(sizes[c]);
      movement = std::max(movement, std::sqrt(squared_distance(updated.row(c), centers.row(c))));
    }
    const double after_update = total_wcss(x, updated, res.labels);
    if (after_update > current + 1e-9 * std::max(1.0, std::abs(current))) {
      throw std::logic_error("k-means: center update increased the sum of squares");
    }
    centers = std::move(updated);
    previous = after_update;
    res.iterations = iter;
    if (movement < cfg.tol) break;
  }
  res.labels = assign_clusters(x, centers);
  repair_empty_clusters(x, centers, res.labels);
  res.wcss = total_wcss(x, centers, res.labels);
  res.centers = std::move(centers);
  return res;
}

// Sum that does not depend on the order of the terms, so that the
// clustering scores are exactly symmetric and invariant to label renaming.
double order_free_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::size_t k = 2; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

}  // namespace

NeighborLists knn(const Matrix& query, const Matrix& reference, std::size_t k,
                  const DistanceKind& kind, bool exclude_self) {
  if (exclude_self && query.rows() != reference.rows()) {
    throw PreconditionError("exclude_self requires the query set to be the reference set");
  }
  const std::size_t available = reference.rows() - (exclude_self ? 1 : 0);
  if (k > available || reference.rows() == 0) {
    throw KTooLarge("k = " + std::to_string(k) + " exceeds the " + std::to_string(available) +
                    " available references");
  }
  const DistanceMatrix m = pairwise_matrix(kind, query, reference);
  NeighborLists out(query.rows());
  const long long rows = static_cast<long long>(query.rows());
#pragma omp parallel for schedule(static)
  for (long long q = 0; q < rows; ++q) {
    std::vector<std::size_t> idx;
    idx.reserve(reference.rows());
    for (std::size_t r = 0; r < reference.rows(); ++r) {
      if (exclude_self && r == static_cast<std::size_t>(q)) continue;
      idx.push_back(r);
    }
    NeighborOrder order{m.values.row(q), m.inverted};
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), order);
    idx.resize(k);
    out[q] = std::move(idx);
  }
  return out;
}

std::vector<std::optional<QueryRetrieval>> per_query_retrieval(
    const NeighborLists& neighbors, const LabelVector& query_labels,
    const LabelVector& reference_labels, bool self_excluded) {
  if (neighbors.size() != query_labels.size()) {
    throw ShapeMismatch("neighbor lists do not match query label count");
  }
  std::map<std::int64_t, std::size_t> class_counts;
  for (std::size_t r = 0; r < reference_labels.size(); ++r) ++class_counts[reference_labels[r]];

  std::vector<std::optional<QueryRetrieval>> out(neighbors.size());
  for (std::size_t q = 0; q < neighbors.size(); ++q) {
    const std::int64_t label = query_labels[q];
    auto it = class_counts.find(label);
    std::size_t relevant = it == class_counts.end() ? 0 : it->second;
    if (self_excluded && relevant > 0) --relevant;
    if (relevant == 0) continue;
    const auto& list = neighbors[q];
    if (list.size() < relevant) {
      throw InsufficientNeighbors("query " + std::to_string(q) + " has " +
                                  std::to_string(list.size()) + " neighbors but R = " +
                                  std::to_string(relevant));
    }
    QueryRetrieval s;
    s.relevant = relevant;
    s.top1_match = reference_labels[list[0]] == label;
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t rank = 0; rank < relevant; ++rank) {
      if (reference_labels[list[rank]] != label) continue;
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
    s.r_precision = static_cast<double>(hits) / static_cast<double>(relevant);
    s.map_at_r = precision_sum / static_cast<double>(relevant);
    out[q] = s;
  }
  return out;
}

RetrievalMetrics retrieval_metrics(const NeighborLists& neighbors,
                                   const LabelVector& query_labels,
                                   const LabelVector& reference_labels, bool self_excluded) {
  RetrievalMetrics m;
  for (const auto& s :
       per_query_retrieval(neighbors, query_labels, reference_labels, self_excluded)) {
    if (!s) continue;
    ++m.queries;
    m.precision_at_1 += s->top1_match ? 1.0 : 0.0;
    m.r_precision += s->r_precision;
    m.map_at_r += s->map_at_r;
  }
  if (m.queries > 0) {
    const double q = static_cast<double>(m.queries);
    m.precision_at_1 /= q;
    m.r_precision /= q;
    m.map_at_r /= q;
  }
  return m;
}

std::vector<std::size_t> assign_clusters(const Matrix& x, const Matrix& centers) {
  std::vector<std::size_t> labels(x.rows());
  const long long rows = static_cast<long long>(x.rows());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = squared_distance(x.row(i), centers.row(c));
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    labels[i] = arg;
  }
  return labels;
}

KMeansResult kmeans(const Matrix& x, std::size_t clusters, const KMeansConfig& cfg) {
  if (clusters == 0 || clusters > x.rows()) {
    throw PreconditionError("k-means needs 1 <= clusters <= points");
  }
  if (cfg.restarts == 0 || cfg.max_iters == 0 || !(cfg.tol > 0.0)) {
    throw ConfigError("k-means needs restarts >= 1, max_iters >= 1 and tol > 0");
  }
  Rng rng(cfg.seed);
  std::optional<KMeansResult> best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    KMeansResult res = lloyd(x, kmeans_plus_plus(x, clusters, rng), cfg);
    if (!best || res.wcss < best->wcss) best = std::move(res);
  }
  return std::move(*best);
}

Contingency::Contingency(const LabelVector& truth, const LabelVector& predicted) {
  if (truth.size() != predicted.size()) {
    throw LengthMismatch("labelings have lengths " + std::to_string(truth.size()) + " and " +
                         std::to_string(predicted.size()));
  }
  rows_ = truth.num_classes();
  cols_ = predicted.num_classes();
  total_ = truth.size();
  counts_.assign(rows_ * cols_, 0);
  row_sums_.assign(rows_, 0);
  col_sums_.assign(cols_, 0);
  for (std::size_t i = 0; i < total_; ++i) {
    const std::size_t a = truth.canonical(i);
    const std::size_t b = predicted.canonical(i);
    ++counts_[a * cols_ + b];
    ++row_sums_[a];
    ++col_sums_[b];
  }
}

double mutual_information(const Contingency& t) {
  const double n = static_cast<double>(t.total());
  std::vector<double> terms;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) {
      const double nij = static_cast<double>(t(i, j));
      if (nij == 0.0) continue;
      const double ai = static_cast<double>(t.row_sums()[i]);
      const double bj = static_cast<double>(t.col_sums()[j]);
      terms.push_back((nij / n) * std::log(n * nij / (ai * bj)));
    }
  }
  return std::max(order_free_sum(terms), 0.0);
}

double entropy(const std::vector<std::size_t>& counts, std::size_t total) {
  const double n = static_cast<double>(total);
  std::vector<double> terms;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    terms.push_back(-p * std::log(p));
  }
  return order_free_sum(terms);
}

double expected_mutual_information(const Contingency& t) {
  const std::size_t n = t.total();
  const double nd = static_cast<double>(n);
  const std::vector<double> lf = log_factorials(n);
  std::vector<double> terms;
  for (std::size_t a : t.row_sums()) {
    for (std::size_t b : t.col_sums()) {
      const std::size_t lo = std::max<std::size_t>(1, a + b > n ? a + b - n : 0);
      const std::size_t hi = std::min(a, b);
      // Shared factorial terms of the hypergeometric probability.
      const double fixed = (lf[a] + lf[n - a]) + (lf[b] + lf[n - b]) - lf[n];
      for (std::size_t nij = lo; nij <= hi; ++nij) {
        const double x = static_cast<double>(nij);
        const double log_p =
            fixed - lf[nij] - (lf[a - nij] + lf[b - nij]) - lf[n - a - b + nij];
        terms.push_back((x / nd) *
                        std::log(nd * x / (static_cast<double>(a) * static_cast<double>(b))) *
                        std::exp(log_p));
      }
    }
  }
  return order_free_sum(terms);
}

ClusteringScores clustering_metrics(const LabelVector& truth, const LabelVector& predicted) {
  const Contingency table(truth, predicted);
  if (table.total() == 0) throw LengthMismatch("clustering metrics need at least one label");
  if (table.rows() == 1 && table.cols() == 1) return {1.0, 1.0};

  const double mi = mutual_information(table);
  const double normalizer = 0.5 * (entropy(table.row_sums(), table.total()) +
                                   entropy(table.col_sums(), table.total()));
  ClusteringScores s;
  s.nmi = normalizer > 0.0 ? mi / normalizer : 0.0;
  const double emi = expected_mutual_information(table);
  const double denom = normalizer - emi;
  s.ami = denom > 0.0 ? (mi - emi) / denom : 0.0;
  return s;
}

AccuracyCalculator::AccuracyCalculator() {
  register_metric(
      "precision_at_1", [](const MetricInputs& in) { return in.retrieval.precision_at_1; }, false);
  register_metric(
      "r_precision", [](const MetricInputs& in) { return in.retrieval.r_precision; }, false);
  register_metric(
      "map_at_r", [](const MetricInputs& in) { return in.retrieval.map_at_r; }, false);
  register_metric(
      "NMI",
      [](const MetricInputs& in) { return clustering_metrics(in.query_labels, *in.cluster_labels).nmi; },
      true);
  register_metric(
      "AMI",
      [](const MetricInputs& in) { return clustering_metrics(in.query_labels, *in.cluster_labels).ami; },
      true);
}

void AccuracyCalculator::register_metric(const std::string& name, MetricFunction fn,
                                         bool needs_clustering) {
  if (metrics_.contains(name)) throw DuplicateName("metric '" + name + "' is already registered");
  metrics_.emplace(name, Entry{std::move(fn), needs_clustering});
}

std::vector<std::string> AccuracyCalculator::registered_metrics() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : metrics_) out.push_back(name);
  return out;
}

std::vector<std::string> AccuracyCalculator::requires_clustering() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : metrics_) {
    if (entry.needs_clustering) out.push_back(name);
  }
  return out;
}

MetricReport AccuracyCalculator::get_accuracy(const Matrix& query, const Matrix& reference,
                                              const LabelVector& query_labels,
                                              const LabelVector& reference_labels,
                                              const CalculatorConfig& cfg,
                                              bool reference_is_query) const {
  bool clustering = false;
  for (const auto& name : cfg.requested_metrics) {
    auto it = metrics_.find(name);
    if (it == metrics_.end()) throw UnknownMetric("metric '" + name + "' is not registered");
    clustering = clustering || it->second.needs_clustering;
  }
  validate_batch(query, query_labels);
  validate_batch(reference, reference_labels);
  if (cfg.k == 0) throw ConfigError("calculator k must be positive");

  const bool exclude_self = cfg.exclude_self && reference_is_query;
  // Enough neighbors for the largest same-class count (R).
  std::map<std::int64_t, std::size_t> counts;
  for (std::int64_t l : reference_labels.raw()) ++counts[l];
  std::size_t max_r = 0;
  for (std::size_t q = 0; q < query_labels.size(); ++q) {
    auto it = counts.find(query_labels[q]);
    if (it != counts.end()) max_r = std::max(max_r, it->second - (exclude_self ? 1 : 0));
  }
  const std::size_t available = reference.rows() - (exclude_self ? 1 : 0);
  const std::size_t k = std::min(std::max(cfg.k, max_r), available);

  const NeighborLists neighbors = knn(query, reference, k, cfg.distance, exclude_self);
  const RetrievalMetrics retrieval =
      retrieval_metrics(neighbors, query_labels, reference_labels, exclude_self);

  std::optional<LabelVector> clusters;
  if (clustering) {
    ++kmeans_runs_;
    const KMeansResult km = kmeans(query, query_labels.num_classes(), cfg.kmeans);
    std::vector<std::int64_t> ids(km.labels.begin(), km.labels.end());
    clusters.emplace(std::move(ids));
  }

  const MetricInputs inputs{query_labels, reference_labels, neighbors, retrieval,
                            clusters ? &*clusters : nullptr};
  MetricReport report;
  for (const auto& name : cfg.requested_metrics) report[name] = metrics_.at(name).fn(inputs);
  return report;
}

}  // namespace mlkit
