#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "mlkit/accuracy.hpp"
#include "mlkit/dataset.hpp"
#include "mlkit/model.hpp"
#include "mlkit/trainer.hpp"

namespace mlkit {

struct DatasetFiles {
  std::filesystem::path embeddings;
  std::filesystem::path labels;
};

struct ModelSpec {
  Architecture architecture = Architecture::Linear;
  std::size_t hidden = 0;  // MLP only
  std::size_t d_out = 2;
};

struct RunConfig {
  TrainConfig train;
  CalculatorConfig calculator;
  ModelSpec model;
  // Exactly one is set.
  std::optional<SyntheticSpec> synthetic;
  std::optional<DatasetFiles> files;
  bool evaluate_each_epoch = false;
};

// Parses a JSON run configuration. Unknown keys, wrong types, missing
// required keys and invalid values raise ConfigError (IncompatibleDistance
// for loss/distance mismatches). Relative paths resolve against base_dir.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});

// Throws IoFailure when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mlkit
