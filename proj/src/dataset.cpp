#include "mlkit/dataset.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "mlkit/rng.hpp"

namespace mlkit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.empty()) throw ParseError(line, "empty field");
  double v = 0.0;
  const char* begin = token.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open " + path.string());
  return f;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t blank_line = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      if (blank_line == 0) blank_line = line_no;
      continue;
    }
    if (blank_line != 0) throw ParseError(blank_line, "blank line");
    std::size_t fields = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw ShapeError(line_no, "expected " + std::to_string(cols) + " fields, found " +
                                    std::to_string(fields));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

LabelVector read_labels(std::istream& in) {
  std::vector<std::int64_t> labels;
  std::size_t line_no = 0;
  std::size_t blank_line = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view token = trim(line);
    if (token.empty()) {
      if (blank_line == 0) blank_line = line_no;
      continue;
    }
    if (blank_line != 0) throw ParseError(blank_line, "blank line");
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || v < 0) {
      throw ParseError(line_no, "not a non-negative integer label: '" + std::string(token) + "'");
    }
    labels.push_back(v);
  }
  return LabelVector(std::move(labels));
}

LabeledEmbeddings load_embeddings_csv(const std::filesystem::path& path,
                                      const std::optional<std::filesystem::path>& labels_path) {
  auto f = open_input(path);
  LabeledEmbeddings out{EmbeddingBatch(read_matrix_csv(f)), std::nullopt};
  if (labels_path) {
    auto lf = open_input(*labels_path);
    out.labels = read_labels(lf);
    validate_batch(out.embeddings, *out.labels);
  }
  return out;
}

void write_matrix_csv(const Matrix& m, std::ostream& out) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

void write_embeddings_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  write_matrix_csv(m, f);
}

void write_labels(const LabelVector& y, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  for (std::int64_t l : y.raw()) f << l << '\n';
}

Dataset synthetic_gaussians(const SyntheticSpec& spec) {
  if (spec.classes == 0 || spec.per_class == 0 || spec.d_in == 0) {
    throw ConfigError("synthetic dataset sizes must be positive");
  }
  if (!(spec.center_spread >= 0.0) || !(spec.noise_dev >= 0.0)) {
    throw ConfigError("synthetic dataset spreads must be >= 0");
  }
  Rng rng(spec.seed);
  Matrix centers(spec.classes, spec.d_in);
  for (double& v : centers.data()) v = rng.normal(0.0, spec.center_spread);

  Matrix data(spec.classes * spec.per_class, spec.d_in);
  std::vector<std::int64_t> labels;
  labels.reserve(data.rows());
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k) {
      const std::size_t i = c * spec.per_class + k;
      for (std::size_t j = 0; j < spec.d_in; ++j) {
        data(i, j) = centers(c, j) + rng.normal(0.0, spec.noise_dev);
      }
      labels.push_back(static_cast<std::int64_t>(c));
    }
  }
  return {std::move(data), LabelVector(std::move(labels))};
}

}  // namespace mlkit
