#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <vector>

#include "mlkit/accuracy.hpp"
#include "mlkit/losses.hpp"
#include "mlkit/miners.hpp"
#include "mlkit/model.hpp"
#include "mlkit/samplers.hpp"

namespace mlkit {

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
};

struct TrainConfig {
  LossConfig loss;
  std::optional<MinerConfig> miner;
  SamplerConfig sampler;
  OptimizerConfig optimizer;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1;
  std::filesystem::path output_dir;

  // Throws ConfigError / IncompatibleDistance.
  void validate() const;
};

struct IterationInfo {
  std::size_t epoch;      // 1-based
  std::size_t iteration;  // 1-based within the epoch
  double loss;
  std::size_t pos_pairs;
  std::size_t neg_pairs;
  std::size_t triplets;
};

struct EpochInfo {
  std::size_t epoch;  // 1-based
  double mean_loss;
  const EmbedderModel& model;
};

struct TrainHooks {
  std::function<void(const IterationInfo&)> end_of_iteration;
  std::function<void(const EpochInfo&)> end_of_epoch;
};

struct TrainRecord {
  std::vector<double> iteration_losses;
  std::vector<double> epoch_mean_losses;
  std::vector<MetricReport> epoch_reports;
  std::vector<std::filesystem::path> checkpoints;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

// Raised when a loss turns NaN/Inf; carries the record up to that point.
class DivergenceDetected : public Error {
 public:
  DivergenceDetected(const std::string& what, TrainRecord record)
      : Error(what), record_(std::move(record)) {}
  const TrainRecord& record() const { return record_; }

 private:
  TrainRecord record_;
};

// Forward/backward loop with SGD + classical momentum (v = mu v + g;
// p -= lr v). Labels are canonicalized before batching, so ArcFace class
// rows are indexed by canonical class id.
class Trainer {
 public:
  Trainer(EmbedderModel& model, TrainConfig cfg);

  TrainRecord train(const Matrix& data, const LabelVector& y, const TrainHooks& hooks = {});

  // ArcFace class weights after training (empty for other losses).
  const std::optional<ClassWeights>& class_weights() const { return class_weights_; }

 private:
  EmbedderModel& model_;
  TrainConfig cfg_;
  std::optional<ClassWeights> class_weights_;
};

TrainRecord train(EmbedderModel& model, const Matrix& data, const LabelVector& y,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

// Loss value and parameter gradients of one batch through model + loss.
struct StepGradients {
  double loss = 0.0;
  std::vector<Matrix> model_grads;
  std::optional<Matrix> weight_grads;
  TupleSet tuples;
};

StepGradients batch_gradients(const EmbedderModel& model, const Matrix& batch,
                              const LabelVector& batch_labels, const TrainConfig& cfg,
                              const ClassWeights* weights);

using EmbeddingTransform = std::function<Matrix(const Matrix&)>;

struct Evaluation {
  MetricReport report;
  Matrix embeddings;  // after transforms
  Matrix projection;  // n x 2, top principal components
};

// Embeds data, applies transforms in order (default: row L2 normalization),
// then runs get_accuracy with query = reference.
Evaluation evaluate(const EmbedderModel& model, const Matrix& data, const LabelVector& y,
                    const CalculatorConfig& calc_cfg,
                    const std::vector<EmbeddingTransform>& transforms = {
                        [](const Matrix& m) { return l2_normalize_rows(m); }},
                    const AccuracyCalculator* calculator = nullptr);

// Rows projected onto the top principal components (deterministic signs:
// the largest-magnitude loading of each component is positive). Columns
// beyond the embedding width are zero.
Matrix principal_projection(const Matrix& x, std::size_t components = 2);

// Logging, checkpointing and optional per-epoch evaluation wired into the
// trainer's hooks: the complete train/test workflow.
class HookContainer {
 public:
  struct Options {
    std::filesystem::path output_dir;
    std::size_t checkpoint_every = 1;
    // When set, every epoch is evaluated on this data.
    const Matrix* eval_data = nullptr;
    const LabelVector* eval_labels = nullptr;
    std::optional<CalculatorConfig> eval_config;
  };

  explicit HookContainer(Options options);

  TrainHooks hooks();

  // Copies collected reports and checkpoint paths into record.
  void finish(TrainRecord& record) const;

  std::filesystem::path log_path() const { return options_.output_dir / "train_log.jsonl"; }

 private:
  Options options_;
  std::ofstream log_;
  std::vector<MetricReport> reports_;
  std::vector<std::filesystem::path> checkpoints_;
};

// train() under a HookContainer; also writes model_final.ckpt.
TrainRecord run_training(EmbedderModel& model, const Matrix& data, const LabelVector& y,
                         const TrainConfig& cfg,
                         const std::optional<CalculatorConfig>& per_epoch_eval = std::nullopt);

}  // namespace mlkit
