#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mlkit/errors.hpp"
#include "mlkit/matrix.hpp"

namespace mlkit {

inline constexpr double kDefaultEps = 1e-8;

// n x d embeddings, n >= 1, d >= 1, every entry finite. Immutable once built.
class EmbeddingBatch {
 public:
  // Throws ShapeMismatch on an empty matrix, NonFiniteInput on NaN/Inf.
  explicit EmbeddingBatch(Matrix values);

  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  std::span<const double> row(std::size_t i) const { return values_.row(i); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Class labels with a canonical 0..C-1 relabeling (ascending original id).
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<std::int64_t> labels);

  std::size_t size() const { return labels_.size(); }
  std::int64_t operator[](std::size_t i) const { return labels_[i]; }
  std::size_t canonical(std::size_t i) const { return canonical_[i]; }
  std::size_t num_classes() const { return original_ids_.size(); }
  std::int64_t original_id(std::size_t c) const { return original_ids_[c]; }

  const std::vector<std::int64_t>& raw() const { return labels_; }
  const std::vector<std::size_t>& canonical_labels() const { return canonical_; }

  LabelVector subset(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<std::int64_t> labels_;
  std::vector<std::size_t> canonical_;
  std::vector<std::int64_t> original_ids_;
};

using IndexPair = std::array<std::size_t, 2>;
using IndexTriplet = std::array<std::size_t, 3>;

enum class TupleArity { Pairs, Triplets };

struct TupleSet {
  std::vector<IndexPair> pos_pairs;
  std::vector<IndexPair> neg_pairs;
  std::vector<IndexTriplet> triplets;
  TupleArity arity = TupleArity::Pairs;

  bool empty() const { return pos_pairs.empty() && neg_pairs.empty() && triplets.empty(); }

  // Checks index range, label agreement and the single-arity rule.
  void validate(const LabelVector& y) const;
};

template <typename Index>
struct LossTerms {
  std::vector<double> values;
  std::vector<Index> indices;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  void push(double v, Index idx) {
    values.push_back(v);
    indices.push_back(idx);
  }
};

enum class LossArity { Element, PosPair, NegPair, Triplet };

// Pre-reduction record of a loss evaluation.
struct LossBundle {
  LossTerms<std::size_t> per_element;
  LossTerms<IndexPair> per_pos_pair;
  LossTerms<IndexPair> per_neg_pair;
  LossTerms<IndexTriplet> per_triplet;

  // Set when no valid tuples remained after conversion.
  bool empty_tuples = false;
  // Anchors whose positive pairs were dropped for lack of negatives.
  std::vector<std::size_t> skipped_anchors;

  const std::vector<double>& values(LossArity arity) const;
  bool empty() const;
};

// Metric name -> value, sorted by name.
using MetricReport = std::map<std::string, double>;

// Throws ShapeMismatch or NonFiniteInput.
void validate_batch(const Matrix& x, const LabelVector& y);
void validate_batch(const EmbeddingBatch& x, const LabelVector& y);

// Divides each row by max(norm, eps).
Matrix l2_normalize_rows(const Matrix& x, double eps = kDefaultEps);
EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& x, double eps = kDefaultEps);

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& indices);

}  // namespace mlkit
