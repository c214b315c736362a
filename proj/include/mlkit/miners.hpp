#pragma once

#include <vector>

#include "mlkit/core.hpp"
#include "mlkit/distances.hpp"

namespace mlkit {

struct MinerConfig {
  double epsilon = 0.1;
  DistanceKind distance = DistanceKind::cosine();
};

// Every valid pair or triplet, in ascending lexicographic index order.
TupleSet all_tuples(const LabelVector& y, TupleArity arity);

// Keeps positives harder than the easiest negative (within epsilon) and
// negatives harder than the hardest positive (within epsilon), per anchor.
TupleSet multi_similarity_miner(const Matrix& x, const LabelVector& y, const MinerConfig& cfg);

// Same rule applied to a precomputed matrix.
TupleSet multi_similarity_mine(const DistanceMatrix& m, const LabelVector& y, double epsilon);

// Combines positive and negative pairs that share an anchor.
TupleSet pairs_to_triplets(const TupleSet& t);

// (a,p,n) -> (a,p) and (a,n); duplicates are preserved.
TupleSet triplets_to_pairs(const TupleSet& t);

// Occurrence count of each index over all tuples, divided by the largest count.
std::vector<double> tuple_frequency_weights(const TupleSet& t, std::size_t n);

}  // namespace mlkit
