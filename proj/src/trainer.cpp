#include "mlkit/trainer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "mlkit/checkpoint.hpp"

namespace mlkit {

void TrainConfig::validate() const {
  loss.validate();
  if (!(optimizer.learning_rate >= 0.0) || !std::isfinite(optimizer.learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(optimizer.momentum >= 0.0 && optimizer.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  if (miner && (std::isnan(miner->epsilon) || miner->epsilon < 0.0 ||
                !std::isfinite(miner->epsilon))) {
    throw ConfigError("miner epsilon must be finite and >= 0");
  }
}

StepGradients batch_gradients(const EmbedderModel& model, const Matrix& batch,
                              const LabelVector& batch_labels, const TrainConfig& cfg,
                              const ClassWeights* weights) {
  EmbedderModel::Cache cache;
  const Matrix embeddings = model.forward(batch, &cache);
  StepGradients out;
  const TupleSet* tuples = nullptr;
  if (cfg.miner) {
    out.tuples = multi_similarity_miner(embeddings, batch_labels, *cfg.miner);
    tuples = &out.tuples;
  }
  LossOutput loss = compute_loss(embeddings, batch_labels, tuples, cfg.loss, weights);
  out.loss = loss.value;
  out.model_grads = model.backward(cache, loss.grad_embeddings);
  out.weight_grads = std::move(loss.grad_weights);
  return out;
}

Trainer::Trainer(EmbedderModel& model, TrainConfig cfg) : model_(model), cfg_(std::move(cfg)) {
  cfg_.validate();
}

namespace {

void sgd_step(Matrix& param, Matrix& velocity, const Matrix& grad, const OptimizerConfig& opt) {
  auto p = param.data();
  auto v = velocity.data();
  auto g = grad.data();
  for (std::size_t k = 0; k < p.size(); ++k) {
    v[k] = opt.momentum * v[k] + g[k];
    p[k] -= opt.learning_rate * v[k];
  }
}

}  // namespace

TrainRecord Trainer::train(const Matrix& data, const LabelVector& y, const TrainHooks& hooks) {
  validate_batch(data, y);
  if (data.cols() != model_.input_dim()) {
    throw DimensionMismatch("data has " + std::to_string(data.cols()) +
                            " columns but the model expects " +
                            std::to_string(model_.input_dim()));
  }
  const std::vector<std::int64_t> ids(y.canonical_labels().begin(), y.canonical_labels().end());
  const LabelVector labels(ids);

  if (cfg_.loss.name == LossName::ArcFace) {
    Rng rng(cfg_.seed);
    class_weights_ = ClassWeights::initialize(labels.num_classes(), model_.output_dim(), rng);
  }

  MPerClassSampler sampler(labels, cfg_.sampler);
  std::vector<Matrix> velocity;
  for (const Matrix& p : model_.parameters()) velocity.emplace_back(p.rows(), p.cols());
  Matrix weight_velocity;
  if (class_weights_) weight_velocity = Matrix(class_weights_->w.rows(), class_weights_->w.cols());

  TrainRecord record;
  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    const std::vector<IndexBatch> batches = sampler.next_epoch();
    double epoch_total = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Matrix batch = select_rows(data, batches[b]);
      const LabelVector batch_labels = labels.subset(batches[b]);
      StepGradients step = batch_gradients(model_, batch, batch_labels, cfg_,
                                           class_weights_ ? &*class_weights_ : nullptr);
      bool finite = std::isfinite(step.loss);
      for (const Matrix& g : step.model_grads) finite = finite && g.all_finite();
      if (step.weight_grads) finite = finite && step.weight_grads->all_finite();
      if (!finite) {
        throw DivergenceDetected("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                                     ", iteration " + std::to_string(b + 1),
                                 record);
      }

      auto& params = model_.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        sgd_step(params[k], velocity[k], step.model_grads[k], cfg_.optimizer);
      }
      if (class_weights_) {
        sgd_step(class_weights_->w, weight_velocity, *step.weight_grads, cfg_.optimizer);
      }

      record.iteration_losses.push_back(step.loss);
      epoch_total += step.loss;
      if (hooks.end_of_iteration) {
        hooks.end_of_iteration({epoch, b + 1, step.loss, step.tuples.pos_pairs.size(),
                                step.tuples.neg_pairs.size(), step.tuples.triplets.size()});
      }
    }
    const double mean = epoch_total / static_cast<double>(batches.size());
    record.epoch_mean_losses.push_back(mean);
    if (hooks.end_of_epoch) hooks.end_of_epoch({epoch, mean, model_});
  }
  return record;
}

TrainRecord train(EmbedderModel& model, const Matrix& data, const LabelVector& y,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  Trainer trainer(model, cfg);
  return trainer.train(data, y, hooks);
}

Matrix principal_projection(const Matrix& x, std::size_t components) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix out(n, components);
  if (n == 0 || d == 0) return out;

  Eigen::MatrixXd centered(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, j) = x(i, j) - mean;
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::MatrixXd& vecs = solver.eigenvectors();  // ascending eigenvalues

  for (std::size_t c = 0; c < components && c < d; ++c) {
    Eigen::VectorXd axis = vecs.col(static_cast<Eigen::Index>(d - 1 - c));
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    const Eigen::VectorXd proj = centered * axis;
    for (std::size_t i = 0; i < n; ++i) out(i, c) = proj(static_cast<Eigen::Index>(i));
  }
  return out;
}

Evaluation evaluate(const EmbedderModel& model, const Matrix& data, const LabelVector& y,
                    const CalculatorConfig& calc_cfg,
                    const std::vector<EmbeddingTransform>& transforms,
                    const AccuracyCalculator* calculator) {
  validate_batch(data, y);
  Evaluation ev;
  ev.embeddings = model.forward(data);
  for (const auto& t : transforms) ev.embeddings = t(ev.embeddings);
  const AccuracyCalculator fallback;
  const AccuracyCalculator& calc = calculator ? *calculator : fallback;
  ev.report = calc.get_accuracy(ev.embeddings, ev.embeddings, y, y, calc_cfg, true);
  ev.projection = principal_projection(ev.embeddings, 2);
  return ev;
}

HookContainer::HookContainer(Options options) : options_(std::move(options)) {
  if (options_.checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  std::filesystem::create_directories(options_.output_dir);
  log_.open(log_path(), std::ios::trunc);
  if (!log_) throw IoFailure("cannot open " + log_path().string());
}

TrainHooks HookContainer::hooks() {
  TrainHooks h;
  h.end_of_iteration = [this](const IterationInfo& it) {
    nlohmann::ordered_json rec;
    rec["epoch"] = it.epoch;
    rec["iteration"] = it.iteration;
    rec["loss"] = it.loss;
    rec["pos_pairs"] = it.pos_pairs;
    rec["neg_pairs"] = it.neg_pairs;
    rec["triplets"] = it.triplets;
    log_ << rec.dump() << '\n';
  };
  h.end_of_epoch = [this](const EpochInfo& ep) {
    log_.flush();
    if (ep.epoch % options_.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_epoch_%04zu.ckpt", ep.epoch);
      const auto path = options_.output_dir / name;
      checkpoint_save(ep.model, path);
      checkpoints_.push_back(path);
    }
    if (options_.eval_config && options_.eval_data && options_.eval_labels) {
      reports_.push_back(
          evaluate(ep.model, *options_.eval_data, *options_.eval_labels, *options_.eval_config)
              .report);
    }
  };
  return h;
}

void HookContainer::finish(TrainRecord& record) const {
  record.epoch_reports = reports_;
  record.checkpoints = checkpoints_;
}

TrainRecord run_training(EmbedderModel& model, const Matrix& data, const LabelVector& y,
                         const TrainConfig& cfg,
                         const std::optional<CalculatorConfig>& per_epoch_eval) {
  HookContainer container({cfg.output_dir, cfg.checkpoint_every, &data, &y, per_epoch_eval});
  Trainer trainer(model, cfg);
  TrainRecord record;
  try {
    record = trainer.train(data, y, container.hooks());
  } catch (const DivergenceDetected& e) {
    TrainRecord partial = e.record();
    container.finish(partial);
    throw DivergenceDetected(e.what(), std::move(partial));
  }
  container.finish(record);
  const auto final_path = cfg.output_dir / "model_final.ckpt";
  checkpoint_save(model, final_path);
  record.checkpoints.push_back(final_path);
  return record;
}

}  // namespace mlkit
