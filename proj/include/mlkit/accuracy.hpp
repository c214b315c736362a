#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlkit/core.hpp"
#include "mlkit/distances.hpp"

namespace mlkit {

using NeighborLists = std::vector<std::vector<std::size_t>>;

// Exact top-k per query: ascending for distances, descending for
// similarities, lower reference index first on ties. exclude_self removes
// reference i from query i's list and requires equal row counts.
// Throws KTooLarge.
NeighborLists knn(const Matrix& query, const Matrix& reference, std::size_t k,
                  const DistanceKind& kind, bool exclude_self);

struct QueryRetrieval {
  std::size_t relevant = 0;  // R
  double r_precision = 0.0;
  double map_at_r = 0.0;
  bool top1_match = false;
};

// Per-query scores; std::nullopt for queries with R = 0.
// Throws InsufficientNeighbors when a list is shorter than R.
std::vector<std::optional<QueryRetrieval>> per_query_retrieval(
    const NeighborLists& neighbors, const LabelVector& query_labels,
    const LabelVector& reference_labels, bool self_excluded);

struct RetrievalMetrics {
  double precision_at_1 = 0.0;
  double r_precision = 0.0;
  double map_at_r = 0.0;
  std::size_t queries = 0;  // queries with R > 0
};

RetrievalMetrics retrieval_metrics(const NeighborLists& neighbors,
                                   const LabelVector& query_labels,
                                   const LabelVector& reference_labels, bool self_excluded);

struct KMeansConfig {
  std::size_t restarts = 5;
  std::size_t max_iters = 300;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centers;
  double wcss = 0.0;
  std::size_t iterations = 0;  // of the winning restart
};

// Lloyd's algorithm with k-means++ seeding; best of cfg.restarts by
// within-cluster sum of squares. Requires 1 <= clusters <= rows.
KMeansResult kmeans(const Matrix& x, std::size_t clusters, const KMeansConfig& cfg);

// Cluster assignment step; parallel over points.
std::vector<std::size_t> assign_clusters(const Matrix& x, const Matrix& centers);

// Count table between two labelings (canonical ids).
class Contingency {
 public:
  // Throws LengthMismatch.
  Contingency(const LabelVector& truth, const LabelVector& predicted);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t total() const { return total_; }
  std::size_t operator()(std::size_t i, std::size_t j) const { return counts_[i * cols_ + j]; }
  const std::vector<std::size_t>& row_sums() const { return row_sums_; }
  const std::vector<std::size_t>& col_sums() const { return col_sums_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> row_sums_;
  std::vector<std::size_t> col_sums_;
};

// Natural-log quantities.
double mutual_information(const Contingency& table);
double entropy(const std::vector<std::size_t>& counts, std::size_t total);
// Exact expectation under the hypergeometric (fixed marginals) model.
double expected_mutual_information(const Contingency& table);

struct ClusteringScores {
  double nmi = 0.0;
  double ami = 0.0;
};

// Arithmetic-mean normalization. Both single-cluster -> 1; a non-positive
// denominator -> 0. Throws LengthMismatch.
ClusteringScores clustering_metrics(const LabelVector& truth, const LabelVector& predicted);

struct CalculatorConfig {
  std::size_t k = 1;
  std::set<std::string> requested_metrics{"AMI", "NMI", "map_at_r", "precision_at_1",
                                          "r_precision"};
  bool exclude_self = true;
  DistanceKind distance = DistanceKind::lp(2.0);
  KMeansConfig kmeans;
};

// What a metric function gets to see.
struct MetricInputs {
  const LabelVector& query_labels;
  const LabelVector& reference_labels;
  const NeighborLists& neighbors;
  const RetrievalMetrics& retrieval;
  // Set only when some requested metric needs clustering.
  const LabelVector* cluster_labels;
};

using MetricFunction = std::function<double(const MetricInputs&)>;

// k-NN metrics always run; k-means runs once per get_accuracy call iff a
// requested metric is listed in requires_clustering().
class AccuracyCalculator {
 public:
  AccuracyCalculator();

  // Throws DuplicateName. Call during setup, before concurrent use.
  void register_metric(const std::string& name, MetricFunction fn, bool needs_clustering);

  std::vector<std::string> registered_metrics() const;
  std::vector<std::string> requires_clustering() const;

  // Throws UnknownMetric, ShapeMismatch, DimensionMismatch.
  MetricReport get_accuracy(const Matrix& query, const Matrix& reference,
                            const LabelVector& query_labels, const LabelVector& reference_labels,
                            const CalculatorConfig& cfg, bool reference_is_query) const;

  std::size_t kmeans_runs() const { return kmeans_runs_.load(); }

 private:
  struct Entry {
    MetricFunction fn;
    bool needs_clustering;
  };
  std::map<std::string, Entry> metrics_;
  mutable std::atomic<std::size_t> kmeans_runs_{0};
};

}  // namespace mlkit
