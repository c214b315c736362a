#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "mlkit/core.hpp"

namespace mlkit {

struct LabeledEmbeddings {
  EmbeddingBatch embeddings;
  std::optional<LabelVector> labels;
};

// Comma-separated rows of numbers, one row per line. Throws IoFailure,
// ParseError (bad token, empty field or blank line) or ShapeError (ragged row).
Matrix read_matrix_csv(std::istream& in);

// One integer per line. Throws ParseError.
LabelVector read_labels(std::istream& in);

// Loads embeddings and, when given, the companion labels file. Throws
// ShapeMismatch if their row counts differ.
LabeledEmbeddings load_embeddings_csv(const std::filesystem::path& path,
                                      const std::optional<std::filesystem::path>& labels_path =
                                          std::nullopt);

// 17 significant digits, so values survive a reload bit-exactly.
void write_matrix_csv(const Matrix& m, std::ostream& out);
void write_embeddings_csv(const Matrix& m, const std::filesystem::path& path);
void write_labels(const LabelVector& y, const std::filesystem::path& path);

struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t per_class = 100;
  std::size_t d_in = 10;
  double center_spread = 5.0;
  double noise_dev = 1.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  Matrix data;
  LabelVector labels;
};

// Class centers ~ N(0, center_spread^2 I), points = center + N(0, noise_dev^2 I).
// Rows are grouped by class, labels 0..classes-1.
Dataset synthetic_gaussians(const SyntheticSpec& spec);

}  // namespace mlkit
