#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlkit/core.hpp"
#include "mlkit/distances.hpp"
#include "mlkit/reducers.hpp"
#include "mlkit/regularizers.hpp"
#include "mlkit/rng.hpp"

namespace mlkit {

// Hyperparameter names per loss, with defaults:
//   TripletMargin   margin 0.05
//   Contrastive     pos_margin 0, neg_margin 1
//   NTXent          temperature 0.07
//   MultiSimilarity alpha 2, beta 50, base 0.5
//   Circle          m 0.4, gamma 80
//   ArcFace         margin 0.5 (radians), scale 64
struct LossConfig {
  LossName name = LossName::TripletMargin;
  DistanceKind distance = DistanceKind::lp(2.0);
  ReducerKind reducer;
  std::optional<RegularizerKind> embedding_regularizer;
  double embedding_reg_weight = 0.0;
  std::optional<RegularizerKind> weight_regularizer;
  double weight_reg_weight = 0.0;
  std::map<std::string, double> hyperparameters;

  // Default distance for the loss: Lp(2) for TripletMargin and Contrastive,
  // CosineSimilarity for the rest.
  static LossConfig defaults(LossName name);

  // Explicit hyperparameter or the documented default.
  double param(const std::string& key) const;

  // Throws ConfigError (unknown/invalid hyperparameters, misplaced weight
  // regularizer, negative weights) or IncompatibleDistance.
  void validate() const;
};

std::vector<std::string> hyperparameter_names(LossName name);
double default_hyperparameter(LossName name, const std::string& key);

// One learned row per class.
struct ClassWeights {
  Matrix w;

  // Gaussian(0, 0.01) entries, then row-normalized.
  static ClassWeights initialize(std::size_t classes, std::size_t dim, Rng& rng);
  std::size_t classes() const { return w.rows(); }
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;
  std::optional<Matrix> grad_weights;
  LossBundle bundle;                    // tuple/classification losses
  LossBundle regularizer_bundle;        // embedding regularizer, if any
  LossBundle weight_regularizer_bundle; // ArcFace weight regularizer, if any
};

// d(loss term)/d(M[row][col]) for one bundle entry.
struct MatrixPartial {
  LossArity arity;
  std::size_t term;
  std::size_t row;
  std::size_t col;
  double value;
};

// Per-tuple losses read off a distance matrix, with their local partials.
struct MatrixLoss {
  LossBundle bundle;
  std::vector<MatrixPartial> partials;
};

// Matrix-level forms. Each picks its hinge/sign direction from m.inverted.
MatrixLoss triplet_margin_terms(const DistanceMatrix& m, const TupleSet& triplets,
                                double margin);
MatrixLoss contrastive_terms(const DistanceMatrix& m, const TupleSet& pairs, double pos_margin,
                             double neg_margin);
MatrixLoss ntxent_terms(const DistanceMatrix& m, const TupleSet& pairs, double temperature);
MatrixLoss multi_similarity_terms(const DistanceMatrix& m, const TupleSet& pairs, double alpha,
                                  double beta, double base);
MatrixLoss circle_terms(const DistanceMatrix& m, const TupleSet& pairs, double margin,
                        double gamma);

// Sums reducer-weighted partials into dL/dM.
Matrix accumulate_partials(const MatrixLoss& terms, const ReducerKind& reducer,
                           std::size_t rows, std::size_t cols);

// Full pipelines. With tuples == nullptr every valid tuple of the loss's
// arity is used; pairs and triplets are converted as needed.
LossOutput triplet_margin_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                               const LossConfig& cfg);
LossOutput contrastive_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                            const LossConfig& cfg);
LossOutput ntxent_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                       const LossConfig& cfg);
LossOutput multi_similarity_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                                 const LossConfig& cfg);
LossOutput circle_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                       const LossConfig& cfg);

// Label values index rows of weights directly (LabelOutOfRange if >= C).
// When tuples are given, each element's loss is scaled by its tuple
// frequency weight.
LossOutput arcface_loss(const Matrix& x, const LabelVector& y, const ClassWeights& weights,
                        const LossConfig& cfg, const TupleSet* tuples = nullptr);

// Dispatches on cfg.name. weights is required for ArcFace.
LossOutput compute_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                        const LossConfig& cfg, const ClassWeights* weights = nullptr);

// reduce(tuple) + embedding_reg_weight * reduce(reg) + weight_reg_weight * reduce(weight_reg).
double compose_final_loss(const LossBundle& tuple_bundle, const LossBundle& reg_bundle,
                          const LossConfig& cfg, const LossBundle& weight_reg_bundle = {});

}  // namespace mlkit
