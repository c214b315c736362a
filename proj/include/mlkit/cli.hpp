#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlkit/core.hpp"

namespace mlkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

// Trains, evaluates and writes train_log.jsonl, checkpoints, report.json and
// projection.csv into the configured output_dir.
int cmd_train(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::filesystem::path embeddings;
  std::filesystem::path labels;
  std::size_t k = 1;
  std::vector<std::string> metrics;  // empty: the five defaults
  std::string distance = "euclidean";
};

// Prints the report for precomputed embeddings (query = reference).
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

// JSON object, keys sorted, two-space indent, trailing newline.
std::string format_report(const MetricReport& report);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlkit::cli
