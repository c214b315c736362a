#include "mlkit/model.hpp"

#include <algorithm>

namespace mlkit {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double dev, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal(0.0, dev);
  return m;
}

}  // namespace

EmbedderModel EmbedderModel::linear(std::size_t d_in, std::size_t d_out, Rng& rng) {
  if (d_in == 0 || d_out == 0) throw ConfigError("model dimensions must be positive");
  std::vector<Matrix> params;
  params.push_back(gaussian(d_out, d_in, 0.1, rng));
  params.emplace_back(1, d_out);
  return {Architecture::Linear, {d_in, d_out}, std::move(params)};
}

EmbedderModel EmbedderModel::mlp(std::size_t d_in, std::size_t hidden, std::size_t d_out,
                                 Rng& rng) {
  if (d_in == 0 || hidden == 0 || d_out == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  std::vector<Matrix> params;
  params.push_back(gaussian(hidden, d_in, 0.1, rng));
  params.emplace_back(1, hidden);
  params.push_back(gaussian(d_out, hidden, 0.1, rng));
  params.emplace_back(1, d_out);
  return {Architecture::MLP, {d_in, hidden, d_out}, std::move(params)};
}

EmbedderModel EmbedderModel::from_parameters(Architecture arch, std::vector<std::size_t> dims,
                                             std::vector<Matrix> params) {
  const std::size_t layers = arch == Architecture::Linear ? 1 : 2;
  if (dims.size() != layers + 1 || params.size() != 2 * layers) {
    throw ConfigError("parameter list does not match the architecture");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = params[2 * l];
    const Matrix& b = params[2 * l + 1];
    if (w.rows() != dims[l + 1] || w.cols() != dims[l] || b.rows() != 1 ||
        b.cols() != dims[l + 1]) {
      throw ConfigError("layer " + std::to_string(l) + " parameters have the wrong shape");
    }
    if (!w.all_finite() || !b.all_finite()) throw NonFiniteInput("non-finite model parameter");
  }
  return {arch, std::move(dims), std::move(params)};
}

Matrix EmbedderModel::forward(const Matrix& x, Cache* cache) const {
  if (x.cols() != input_dim()) {
    throw DimensionMismatch("model expects " + std::to_string(input_dim()) +
                            " input columns, got " + std::to_string(x.cols()));
  }
  const std::size_t layers = params_.size() / 2;
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = params_[2 * l];
    const Matrix& b = params_[2 * l + 1];
    Matrix z(h.rows(), w.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (std::size_t o = 0; o < w.rows(); ++o) z(i, o) = dot(h.row(i), w.row(o)) + b(0, o);
    }
    if (cache) {
      cache->inputs.push_back(h);
      cache->pre_activations.push_back(z);
    }
    if (l + 1 < layers) {
      for (double& v : z.data()) v = std::max(v, 0.0);
    }
    h = std::move(z);
  }
  return h;
}

std::vector<Matrix> EmbedderModel::backward(const Cache& cache, const Matrix& grad_out) const {
  const std::size_t layers = params_.size() / 2;
  std::vector<Matrix> grads(params_.size());
  Matrix g = grad_out;
  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = params_[2 * l];
    const Matrix& input = cache.inputs[l];
    if (l + 1 < layers) {
      const Matrix& z = cache.pre_activations[l];
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (z.data()[k] <= 0.0) g.data()[k] = 0.0;
      }
    }
    Matrix dw(w.rows(), w.cols());
    Matrix db(1, w.rows());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double go = g(i, o);
        if (go == 0.0) continue;
        db(0, o) += go;
        for (std::size_t k = 0; k < w.cols(); ++k) dw(o, k) += go * input(i, k);
      }
    }
    if (l > 0) {
      Matrix next(g.rows(), w.cols());
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t o = 0; o < w.rows(); ++o) {
          const double go = g(i, o);
          if (go == 0.0) continue;
          for (std::size_t k = 0; k < w.cols(); ++k) next(i, k) += go * w(o, k);
        }
      }
      g = std::move(next);
    }
    grads[2 * l] = std::move(dw);
    grads[2 * l + 1] = std::move(db);
  }
  return grads;
}

}  // namespace mlkit
