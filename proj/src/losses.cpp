#include "mlkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlkit/miners.hpp"

namespace mlkit {

namespace {

struct HyperDefault {
  const char* key;
  double value;
};

std::vector<HyperDefault> hyper_defaults(LossName name) {
  switch (name) {
    case LossName::TripletMargin:
      return {{"margin", 0.05}};
    case LossName::Contrastive:
      return {{"pos_margin", 0.0}, {"neg_margin", 1.0}};
    case LossName::NTXent:
      return {{"temperature", 0.07}};
    case LossName::MultiSimilarity:
      return {{"alpha", 2.0}, {"beta", 50.0}, {"base", 0.5}};
    case LossName::Circle:
      return {{"m", 0.4}, {"gamma", 80.0}};
    case LossName::ArcFace:
      break;
  }
  return {{"margin", 0.5}, {"scale", 64.0}};
}

// log(sum(exp(z))) with the max subtracted; -inf for an empty list.
double log_sum_exp(const std::vector<double>& z) {
  if (z.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - top);
  return top + std::log(s);
}

// log(sum(exp(z))) - z[target], without the cancellation of subtracting two
// large numbers when z[target] is (close to) the maximum.
double cross_entropy(const std::vector<double>& z, std::size_t target) {
  const auto top = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  double rest = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != top) rest += std::exp(z[j] - z[top]);
  }
  return (z[top] - z[target]) + std::log1p(rest);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_similarity(const DistanceMatrix& m, const char* loss) {
  if (!m.inverted) {
    throw IncompatibleDistance(std::string(loss) +
                               " requires a similarity (inverted) distance matrix");
  }
}

// Per-anchor partner lists (multisets, in input order).
struct AnchorGroups {
  std::vector<std::vector<std::size_t>> pos;
  std::vector<std::vector<std::size_t>> neg;
};

AnchorGroups group_by_anchor(const TupleSet& pairs, std::size_t n) {
  AnchorGroups g{std::vector<std::vector<std::size_t>>(n),
                 std::vector<std::vector<std::size_t>>(n)};
  for (const auto& [a, p] : pairs.pos_pairs) g.pos.at(a).push_back(p);
  for (const auto& [a, q] : pairs.neg_pairs) g.neg.at(a).push_back(q);
  return g;
}

TupleSet as_triplets(const LabelVector& y, const TupleSet* tuples) {
  if (tuples == nullptr) return all_tuples(y, TupleArity::Triplets);
  tuples->validate(y);
  return tuples->arity == TupleArity::Triplets ? *tuples : pairs_to_triplets(*tuples);
}

TupleSet as_pairs(const LabelVector& y, const TupleSet* tuples) {
  if (tuples == nullptr) return all_tuples(y, TupleArity::Pairs);
  tuples->validate(y);
  return tuples->arity == TupleArity::Pairs ? *tuples : triplets_to_pairs(*tuples);
}

void apply_embedding_regularizer(const Matrix& x, const LossConfig& cfg, LossOutput& out) {
  if (!cfg.embedding_regularizer) return;
  out.regularizer_bundle = apply_regularizer(*cfg.embedding_regularizer, x);
  const auto& rule = cfg.reducer.rule_for(LossArity::Element);
  std::vector<double> coeffs = reduce_weights(out.regularizer_bundle.per_element.values, rule);
  for (double& c : coeffs) c *= cfg.embedding_reg_weight;
  out.grad_embeddings += regularizer_backward(*cfg.embedding_regularizer, x, coeffs);
}

// Shared tail of the pair/triplet losses: reduce, backprop, regularize.
LossOutput finish_matrix_loss(const Matrix& x, const LossConfig& cfg, MatrixLoss terms,
                              bool no_tuples) {
  LossOutput out;
  const Matrix d_matrix = accumulate_partials(terms, cfg.reducer, x.rows(), x.rows());
  out.grad_embeddings = pairwise_backward_self(cfg.distance, x, d_matrix);
  out.bundle = std::move(terms.bundle);
  out.bundle.empty_tuples = no_tuples;
  apply_embedding_regularizer(x, cfg, out);
  out.value = compose_final_loss(out.bundle, out.regularizer_bundle, cfg);
  return out;
}

void check_inputs(const Matrix& x, const LabelVector& y, const LossConfig& cfg, LossName expect) {
  if (cfg.name != expect) {
    throw ConfigError("loss config names " + to_string(cfg.name) + ", expected " +
                      to_string(expect));
  }
  cfg.validate();
  validate_batch(x, y);
}

}  // namespace

std::vector<std::string> hyperparameter_names(LossName name) {
  std::vector<std::string> out;
  for (const auto& h : hyper_defaults(name)) out.emplace_back(h.key);
  return out;
}

double default_hyperparameter(LossName name, const std::string& key) {
  for (const auto& h : hyper_defaults(name)) {
    if (key == h.key) return h.value;
  }
  throw ConfigError("loss " + to_string(name) + " has no hyperparameter '" + key + "'");
}

LossConfig LossConfig::defaults(LossName name) {
  LossConfig cfg;
  cfg.name = name;
  cfg.distance = (name == LossName::TripletMargin || name == LossName::Contrastive)
                     ? DistanceKind::lp(2.0)
                     : DistanceKind::cosine();
  return cfg;
}

double LossConfig::param(const std::string& key) const {
  auto it = hyperparameters.find(key);
  if (it != hyperparameters.end()) return it->second;
  return default_hyperparameter(name, key);
}

void LossConfig::validate() const {
  for (const auto& [key, value] : hyperparameters) {
    default_hyperparameter(name, key);  // rejects unknown keys
    if (!std::isfinite(value)) throw ConfigError("hyperparameter '" + key + "' is not finite");
  }
  if (!(embedding_reg_weight >= 0.0) || !(weight_reg_weight >= 0.0)) {
    throw ConfigError("regularizer weights must be >= 0");
  }
  if (weight_regularizer && name != LossName::ArcFace) {
    throw ConfigError("weight_regularizer is only supported by ArcFace");
  }
  if (embedding_regularizer &&
      embedding_regularizer->type == RegularizerKind::Type::RegularFace) {
    throw ConfigError("RegularFace regularizes class weights, not embeddings");
  }
  switch (name) {
    case LossName::NTXent:
      if (!(param("temperature") > 0.0)) throw PreconditionError("NTXent temperature must be > 0");
      break;
    case LossName::MultiSimilarity:
      if (!(param("alpha") > 0.0) || !(param("beta") > 0.0)) {
        throw PreconditionError("MultiSimilarity alpha and beta must be > 0");
      }
      break;
    case LossName::Circle: {
      const double m = param("m");
      if (!(m > 0.0 && m < 1.0) || !(param("gamma") > 0.0)) {
        throw PreconditionError("Circle requires m in (0,1) and gamma > 0");
      }
      break;
    }
    case LossName::ArcFace:
      if (!(param("margin") >= 0.0) || !(param("scale") > 0.0)) {
        throw PreconditionError("ArcFace requires margin >= 0 and scale > 0");
      }
      break;
    case LossName::TripletMargin:
    case LossName::Contrastive:
      break;
  }
  check_distance_compatibility(name, distance);
}

ClassWeights ClassWeights::initialize(std::size_t classes, std::size_t dim, Rng& rng) {
  Matrix w(classes, dim);
  for (double& v : w.data()) v = rng.normal(0.0, 0.01);
  return {l2_normalize_rows(w)};
}

MatrixLoss triplet_margin_terms(const DistanceMatrix& m, const TupleSet& triplets,
                                double margin) {
  MatrixLoss out;
  const double sign = m.inverted ? -1.0 : 1.0;
  for (const auto& t : triplets.triplets) {
    const auto [a, p, n] = t;
    // Inverted: [s_an - s_ap + margin]_+, otherwise [d_ap - d_an + margin]_+.
    const double x = sign * (m(a, p) - m(a, n)) + margin;
    const std::size_t term = out.bundle.per_triplet.size();
    out.bundle.per_triplet.push(std::max(x, 0.0), t);
    if (x > 0.0) {
      out.partials.push_back({LossArity::Triplet, term, a, p, sign});
      out.partials.push_back({LossArity::Triplet, term, a, n, -sign});
    }
  }
  return out;
}

MatrixLoss contrastive_terms(const DistanceMatrix& m, const TupleSet& pairs, double pos_margin,
                             double neg_margin) {
  MatrixLoss out;
  const double sign = m.inverted ? -1.0 : 1.0;
  for (const auto& pr : pairs.pos_pairs) {
    const double x = sign * (m(pr[0], pr[1]) - pos_margin);
    const std::size_t term = out.bundle.per_pos_pair.size();
    out.bundle.per_pos_pair.push(std::max(x, 0.0), pr);
    if (x > 0.0) out.partials.push_back({LossArity::PosPair, term, pr[0], pr[1], sign});
  }
  for (const auto& pr : pairs.neg_pairs) {
    const double x = sign * (neg_margin - m(pr[0], pr[1]));
    const std::size_t term = out.bundle.per_neg_pair.size();
    out.bundle.per_neg_pair.push(std::max(x, 0.0), pr);
    if (x > 0.0) out.partials.push_back({LossArity::NegPair, term, pr[0], pr[1], -sign});
  }
  return out;
}

MatrixLoss ntxent_terms(const DistanceMatrix& m, const TupleSet& pairs, double temperature) {
  if (!(temperature > 0.0)) throw PreconditionError("NTXent temperature must be > 0");
  MatrixLoss out;
  // Distances are negated so that larger logits always mean more similar.
  const double sign = m.inverted ? 1.0 : -1.0;
  const AnchorGroups groups = group_by_anchor(pairs, m.rows());
  std::vector<double> logits;
  for (const auto& pr : pairs.pos_pairs) {
    const auto [a, p] = pr;
    const auto& negs = groups.neg[a];
    if (negs.empty()) {
      auto& skipped = out.bundle.skipped_anchors;
      if (std::find(skipped.begin(), skipped.end(), a) == skipped.end()) skipped.push_back(a);
      continue;
    }
    logits.assign(1, sign * m(a, p) / temperature);
    for (std::size_t q : negs) logits.push_back(sign * m(a, q) / temperature);
    const double lse = log_sum_exp(logits);
    const std::size_t term = out.bundle.per_pos_pair.size();
    out.bundle.per_pos_pair.push(cross_entropy(logits, 0), pr);
    const double scale = sign / temperature;
    out.partials.push_back(
        {LossArity::PosPair, term, a, p, scale * (std::exp(logits[0] - lse) - 1.0)});
    for (std::size_t k = 0; k < negs.size(); ++k) {
      out.partials.push_back(
          {LossArity::PosPair, term, a, negs[k], scale * std::exp(logits[k + 1] - lse)});
    }
  }
  return out;
}

MatrixLoss multi_similarity_terms(const DistanceMatrix& m, const TupleSet& pairs, double alpha,
                                  double beta, double base) {
  require_similarity(m, "MultiSimilarity");
  MatrixLoss out;
  const std::size_t n = m.rows();
  const AnchorGroups groups = group_by_anchor(pairs, n);
  std::vector<double> z;
  for (std::size_t a = 0; a < n; ++a) {
    double value = 0.0;
    // (1/alpha) log(1 + sum exp(-alpha (s - base))) as a log-sum-exp with a 0 logit.
    if (!groups.pos[a].empty()) {
      z.assign(1, 0.0);
      for (std::size_t p : groups.pos[a]) z.push_back(-alpha * (m(a, p) - base));
      const double lse = log_sum_exp(z);
      value += lse / alpha;
      for (std::size_t k = 0; k < groups.pos[a].size(); ++k) {
        out.partials.push_back(
            {LossArity::Element, a, a, groups.pos[a][k], -std::exp(z[k + 1] - lse)});
      }
    }
    if (!groups.neg[a].empty()) {
      z.assign(1, 0.0);
      for (std::size_t q : groups.neg[a]) z.push_back(beta * (m(a, q) - base));
      const double lse = log_sum_exp(z);
      value += lse / beta;
      for (std::size_t k = 0; k < groups.neg[a].size(); ++k) {
        out.partials.push_back(
            {LossArity::Element, a, a, groups.neg[a][k], std::exp(z[k + 1] - lse)});
      }
    }
    out.bundle.per_element.push(value, a);
  }
  return out;
}

MatrixLoss circle_terms(const DistanceMatrix& m, const TupleSet& pairs, double margin,
                        double gamma) {
  require_similarity(m, "Circle");
  MatrixLoss out;
  const std::size_t n = m.rows();
  const AnchorGroups groups = group_by_anchor(pairs, n);
  const double delta_p = 1.0 - margin;
  const double delta_n = margin;
  std::vector<double> zp, zn, dzp, dzn;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& pos = groups.pos[a];
    const auto& neg = groups.neg[a];
    if (pos.empty() || neg.empty()) {
      out.bundle.per_element.push(0.0, a);
      continue;
    }
    zp.clear();
    dzp.clear();
    for (std::size_t p : pos) {
      const double s = m(a, p);
      const double weight = std::max(1.0 + margin - s, 0.0);
      zp.push_back(-gamma * weight * (s - delta_p));
      dzp.push_back(weight > 0.0 ? -gamma * (2.0 - 2.0 * s) : 0.0);
    }
    zn.clear();
    dzn.clear();
    for (std::size_t q : neg) {
      const double s = m(a, q);
      const double weight = std::max(s + margin, 0.0);
      zn.push_back(gamma * weight * (s - delta_n));
      dzn.push_back(weight > 0.0 ? gamma * 2.0 * s : 0.0);
    }
    // log(1 + sum_n sum_p exp(zn + zp)) = softplus(lse(zn) + lse(zp)).
    const double lse_p = log_sum_exp(zp);
    const double lse_n = log_sum_exp(zn);
    const double total = lse_p + lse_n;
    out.bundle.per_element.push(softplus(total), a);
    const double outer = sigmoid(total);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      out.partials.push_back(
          {LossArity::Element, a, a, pos[k], outer * std::exp(zp[k] - lse_p) * dzp[k]});
    }
    for (std::size_t k = 0; k < neg.size(); ++k) {
      out.partials.push_back(
          {LossArity::Element, a, a, neg[k], outer * std::exp(zn[k] - lse_n) * dzn[k]});
    }
  }
  return out;
}

Matrix accumulate_partials(const MatrixLoss& terms, const ReducerKind& reducer,
                           std::size_t rows, std::size_t cols) {
  std::map<LossArity, std::vector<double>> weights;
  for (LossArity arity :
       {LossArity::Element, LossArity::PosPair, LossArity::NegPair, LossArity::Triplet}) {
    weights[arity] = reduce_weights(terms.bundle.values(arity), reducer.rule_for(arity));
  }
  Matrix d(rows, cols);
  for (const auto& part : terms.partials) {
    const double w = weights[part.arity][part.term];
    if (w != 0.0) d(part.row, part.col) += w * part.value;
  }
  return d;
}

LossOutput triplet_margin_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                               const LossConfig& cfg) {
  check_inputs(x, y, cfg, LossName::TripletMargin);
  const TupleSet t = as_triplets(y, tuples);
  const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
  return finish_matrix_loss(x, cfg, triplet_margin_terms(m, t, cfg.param("margin")),
                            t.triplets.empty());
}

LossOutput contrastive_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                            const LossConfig& cfg) {
  check_inputs(x, y, cfg, LossName::Contrastive);
  const TupleSet t = as_pairs(y, tuples);
  const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
  return finish_matrix_loss(
      x, cfg, contrastive_terms(m, t, cfg.param("pos_margin"), cfg.param("neg_margin")),
      t.empty());
}

LossOutput ntxent_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                       const LossConfig& cfg) {
  check_inputs(x, y, cfg, LossName::NTXent);
  const TupleSet t = as_pairs(y, tuples);
  const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
  MatrixLoss terms = ntxent_terms(m, t, cfg.param("temperature"));
  const bool none = terms.bundle.per_pos_pair.empty();
  return finish_matrix_loss(x, cfg, std::move(terms), none);
}

LossOutput multi_similarity_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                                 const LossConfig& cfg) {
  check_inputs(x, y, cfg, LossName::MultiSimilarity);
  const TupleSet t = as_pairs(y, tuples);
  const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
  return finish_matrix_loss(
      x, cfg,
      multi_similarity_terms(m, t, cfg.param("alpha"), cfg.param("beta"), cfg.param("base")),
      t.empty());
}

LossOutput circle_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                       const LossConfig& cfg) {
  check_inputs(x, y, cfg, LossName::Circle);
  const TupleSet t = as_pairs(y, tuples);
  const DistanceMatrix m = pairwise_matrix(cfg.distance, x, x);
  return finish_matrix_loss(x, cfg, circle_terms(m, t, cfg.param("m"), cfg.param("gamma")),
                            t.pos_pairs.empty() || t.neg_pairs.empty());
}

LossOutput arcface_loss(const Matrix& x, const LabelVector& y, const ClassWeights& weights,
                        const LossConfig& cfg, const TupleSet* tuples) {
  check_inputs(x, y, cfg, LossName::ArcFace);
  const std::size_t n = x.rows();
  const std::size_t classes = weights.classes();
  if (weights.w.cols() != x.cols()) {
    throw DimensionMismatch("class weights and embeddings differ in width");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= classes) {
      throw LabelOutOfRange("label " + std::to_string(y[i]) + " has no class weight row (C = " +
                            std::to_string(classes) + ")");
    }
  }

  std::vector<double> element_scale(n, 1.0);
  bool no_tuples = false;
  if (tuples != nullptr) {
    tuples->validate(y);
    element_scale = tuple_frequency_weights(*tuples, n);
    no_tuples = tuples->empty();
  }

  const double margin = cfg.param("margin");
  const double scale = cfg.param("scale");
  const double cos_m = std::cos(margin);
  const double sin_m = std::sin(margin);

  // Both accepted kinds compare unit-normalized rows, i.e. cosines.
  const DistanceKind cosine = DistanceKind::cosine();
  const Matrix cosines = pairwise_matrix(cosine, x, weights.w).values;

  LossOutput out;
  std::vector<std::vector<double>> probs(n);
  std::vector<double> target_slope(n);
  std::vector<double> logits(classes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < classes; ++j) logits[j] = scale * cosines(i, j);
    const double c = std::clamp(cosines(i, label), -1.0, 1.0);
    const double sin_theta = std::sqrt(std::max(1.0 - c * c, 0.0));
    // cos(theta + m) = c cos m - sin(theta) sin m
    logits[label] = scale * (c * cos_m - sin_theta * sin_m);
    target_slope[i] = cos_m + sin_m * c / std::max(sin_theta, 1e-12);
    const double lse = log_sum_exp(logits);
    probs[i].resize(classes);
    for (std::size_t j = 0; j < classes; ++j) probs[i][j] = std::exp(logits[j] - lse);
    out.bundle.per_element.push(element_scale[i] * cross_entropy(logits, label), i);
  }
  out.bundle.empty_tuples = no_tuples;

  const std::vector<double> coeffs =
      reduce_weights(out.bundle.per_element.values, cfg.reducer.rule_for(LossArity::Element));
  Matrix d_cos(n, classes);
  for (std::size_t i = 0; i < n; ++i) {
    const double c_i = coeffs[i] * element_scale[i];
    if (c_i == 0.0) continue;
    const auto label = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < classes; ++j) {
      const double d_logit = probs[i][j] - (j == label ? 1.0 : 0.0);
      d_cos(i, j) = c_i * scale * d_logit * (j == label ? target_slope[i] : 1.0);
    }
  }
  PairwiseGradients g = pairwise_backward(cosine, x, weights.w, d_cos);
  out.grad_embeddings = std::move(g.d_x);
  Matrix grad_w = std::move(g.d_y);

  apply_embedding_regularizer(x, cfg, out);
  if (cfg.weight_regularizer) {
    out.weight_regularizer_bundle = apply_regularizer(*cfg.weight_regularizer, weights.w);
    std::vector<double> wc = reduce_weights(out.weight_regularizer_bundle.per_element.values,
                                            cfg.reducer.rule_for(LossArity::Element));
    for (double& c : wc) c *= cfg.weight_reg_weight;
    grad_w += regularizer_backward(*cfg.weight_regularizer, weights.w, wc);
  }
  out.grad_weights = std::move(grad_w);
  out.value = compose_final_loss(out.bundle, out.regularizer_bundle, cfg,
                                 out.weight_regularizer_bundle);
  return out;
}

LossOutput compute_loss(const Matrix& x, const LabelVector& y, const TupleSet* tuples,
                        const LossConfig& cfg, const ClassWeights* weights) {
  switch (cfg.name) {
    case LossName::TripletMargin:
      return triplet_margin_loss(x, y, tuples, cfg);
    case LossName::Contrastive:
      return contrastive_loss(x, y, tuples, cfg);
    case LossName::NTXent:
      return ntxent_loss(x, y, tuples, cfg);
    case LossName::MultiSimilarity:
      return multi_similarity_loss(x, y, tuples, cfg);
    case LossName::Circle:
      return circle_loss(x, y, tuples, cfg);
    case LossName::ArcFace:
      break;
  }
  if (weights == nullptr) throw PreconditionError("ArcFace needs class weights");
  return arcface_loss(x, y, *weights, cfg, tuples);
}

double compose_final_loss(const LossBundle& tuple_bundle, const LossBundle& reg_bundle,
                          const LossConfig& cfg, const LossBundle& weight_reg_bundle) {
  return reduce(tuple_bundle, cfg.reducer) +
         cfg.embedding_reg_weight * reduce(reg_bundle, cfg.reducer) +
         cfg.weight_reg_weight * reduce(weight_reg_bundle, cfg.reducer);
}

}  // namespace mlkit
