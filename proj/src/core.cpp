#include "mlkit/core.hpp"

#include <algorithm>
#include <cmath>

namespace mlkit {

EmbeddingBatch::EmbeddingBatch(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw ShapeMismatch("embedding batch must have at least one row and one column");
  }
  if (!values_.all_finite()) {
    throw NonFiniteInput("embedding batch contains NaN or Inf");
  }
}

LabelVector::LabelVector(std::vector<std::int64_t> labels) : labels_(std::move(labels)) {
  original_ids_ = labels_;
  std::sort(original_ids_.begin(), original_ids_.end());
  original_ids_.erase(std::unique(original_ids_.begin(), original_ids_.end()),
                      original_ids_.end());
  canonical_.reserve(labels_.size());
  for (std::int64_t l : labels_) {
    if (l < 0) throw ConfigError("labels must be non-negative integers");
    auto it = std::lower_bound(original_ids_.begin(), original_ids_.end(), l);
    canonical_.push_back(static_cast<std::size_t>(it - original_ids_.begin()));
  }
}

LabelVector LabelVector::subset(const std::vector<std::size_t>& indices) const {
  std::vector<std::int64_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels_.at(i));
  return LabelVector(std::move(out));
}

void TupleSet::validate(const LabelVector& y) const {
  const std::size_t n = y.size();
  auto in_range = [n](std::size_t i) { return i < n; };
  if (arity == TupleArity::Pairs && !triplets.empty()) {
    throw PreconditionError("pair-arity tuple set holds triplets");
  }
  if (arity == TupleArity::Triplets && (!pos_pairs.empty() || !neg_pairs.empty())) {
    throw PreconditionError("triplet-arity tuple set holds pairs");
  }
  for (const auto& [a, p] : pos_pairs) {
    if (!in_range(a) || !in_range(p) || a == p || y[a] != y[p]) {
      throw PreconditionError("invalid positive pair");
    }
  }
  for (const auto& [a, q] : neg_pairs) {
    if (!in_range(a) || !in_range(q) || y[a] == y[q]) {
      throw PreconditionError("invalid negative pair");
    }
  }
  for (const auto& [a, p, q] : triplets) {
    if (!in_range(a) || !in_range(p) || !in_range(q) || a == p || y[a] != y[p] ||
        y[a] == y[q]) {
      throw PreconditionError("invalid triplet");
    }
  }
}

const std::vector<double>& LossBundle::values(LossArity arity) const {
  switch (arity) {
    case LossArity::Element:
      return per_element.values;
    case LossArity::PosPair:
      return per_pos_pair.values;
    case LossArity::NegPair:
      return per_neg_pair.values;
    case LossArity::Triplet:
      break;
  }
  return per_triplet.values;
}

bool LossBundle::empty() const {
  return per_element.empty() && per_pos_pair.empty() && per_neg_pair.empty() &&
         per_triplet.empty();
}

void validate_batch(const Matrix& x, const LabelVector& y) {
  if (x.rows() != y.size()) {
    throw ShapeMismatch("embedding rows (" + std::to_string(x.rows()) +
                        ") differ from label count (" + std::to_string(y.size()) + ")");
  }
  if (!x.all_finite()) throw NonFiniteInput("embeddings contain NaN or Inf");
}

void validate_batch(const EmbeddingBatch& x, const LabelVector& y) {
  validate_batch(x.values(), y);
}

Matrix l2_normalize_rows(const Matrix& x, double eps) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double denom = std::max(l2_norm(x.row(i)), eps);
    auto src = x.row(i);
    auto dst = out.row(i);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] / denom;
  }
  return out;
}

EmbeddingBatch l2_normalize_rows(const EmbeddingBatch& x, double eps) {
  return EmbeddingBatch(l2_normalize_rows(x.values(), eps));
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& indices) {
  Matrix out(indices.size(), x.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = x.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace mlkit
