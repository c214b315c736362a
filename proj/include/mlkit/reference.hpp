#pragma once

#include <vector>

#include "mlkit/distances.hpp"

// Straightforward serial versions of the parallel kernels. They are kept for
// the equivalence tests and the kernel benchmark.
namespace mlkit::reference {

DistanceMatrix pairwise_matrix(const DistanceKind& kind, const Matrix& x, const Matrix& y);

PairwiseGradients pairwise_backward(const DistanceKind& kind, const Matrix& x,
                                    const Matrix& y, const Matrix& d_matrix);

// Full sort of every reference per query.
std::vector<std::vector<std::size_t>> knn(const Matrix& query, const Matrix& reference,
                                          std::size_t k, const DistanceKind& kind,
                                          bool exclude_self);

// Nearest-center assignment, squared Euclidean, lowest index on ties.
std::vector<std::size_t> assign_clusters(const Matrix& x, const Matrix& centers);

}  // namespace mlkit::reference
