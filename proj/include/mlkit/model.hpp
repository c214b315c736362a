#pragma once

#include <vector>

#include "mlkit/core.hpp"
#include "mlkit/rng.hpp"

namespace mlkit {

enum class Architecture { Linear, MLP };

// Linear(d_in, d_out) or MLP(d_in, hidden, d_out) with a ReLU after the
// hidden layer. Parameters are stored per layer as [W (out x in), b (1 x out)].
class EmbedderModel {
 public:
  // Gaussian(0, 0.1) weights, zero biases.
  static EmbedderModel linear(std::size_t d_in, std::size_t d_out, Rng& rng);
  static EmbedderModel mlp(std::size_t d_in, std::size_t hidden, std::size_t d_out, Rng& rng);

  // Throws ConfigError when the shapes disagree with the architecture.
  static EmbedderModel from_parameters(Architecture arch, std::vector<std::size_t> dims,
                                       std::vector<Matrix> params);

  Architecture architecture() const { return arch_; }
  // {d_in, d_out} or {d_in, hidden, d_out}.
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }

  std::vector<Matrix>& parameters() { return params_; }
  const std::vector<Matrix>& parameters() const { return params_; }

  struct Cache {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> pre_activations;
  };

  // Throws DimensionMismatch on a width mismatch.
  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

  // Parameter gradients, same layout as parameters().
  std::vector<Matrix> backward(const Cache& cache, const Matrix& grad_out) const;

  friend bool operator==(const EmbedderModel&, const EmbedderModel&) = default;

 private:
  EmbedderModel(Architecture arch, std::vector<std::size_t> dims, std::vector<Matrix> params)
      : arch_(arch), dims_(std::move(dims)), params_(std::move(params)) {}

  Architecture arch_ = Architecture::Linear;
  std::vector<std::size_t> dims_;
  std::vector<Matrix> params_;
};

}  // namespace mlkit
