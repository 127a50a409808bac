#include "mwe/mlp.hpp"

#include <cmath>
#include <string>

#include "mwe/errors.hpp"

namespace mwe {

namespace {

double activate(Activation kind, double slope, double x) {
  switch (kind) {
    case Activation::kLeakyRelu:
      return x > 0 ? x : slope * x;
    case Activation::kRelu:
      return x > 0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
  }
  return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation kind, double slope, double pre) {
  switch (kind) {
    case Activation::kLeakyRelu:
      return pre > 0 ? 1.0 : slope;
    case Activation::kRelu:
      return pre > 0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

}  // namespace

int MlpParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("mlp: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw ShapeError("mlp: bias of layer " + std::to_string(l) + " does not match its weight");
    }
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows()) {
      throw ShapeError("mlp: layer " + std::to_string(l) + " does not chain");
    }
  }
  if (layers.back().weight.rows() != 1) throw ShapeError("mlp: output dimension must be 1");
  if (input_dropout < 0 || input_dropout >= 1) throw ArgumentError("mlp: dropout must lie in [0, 1)");
}

MlpParams make_mlp(const MlpSpec& spec, std::mt19937_64& rng) {
  MlpParams params;
  params.activation = spec.activation;
  params.leaky_slope = spec.leaky_slope;
  params.input_dropout = spec.input_dropout;

  std::vector<int> dims;
  dims.push_back(spec.input_dim);
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(1);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    if (in < 1 || out < 1) throw ArgumentError("mlp: layer widths must be positive");
    DenseLayer layer;
    layer.weight = Matrix::Zero(out, in);
    layer.bias = Vector::Zero(out);
    const bool output = l + 2 == dims.size();
    if (!(output && spec.zero_output_layer)) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> uniform(-bound, bound);
      for (int i = 0; i < out; ++i) {
        for (int j = 0; j < in; ++j) layer.weight(i, j) = uniform(rng);
      }
      for (int i = 0; i < out; ++i) layer.bias(i) = uniform(rng);
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

MlpCache mlp_forward(const MlpParams& params, const ConstMatrixRef& x, bool train_mode,
                     std::mt19937_64* rng) {
  if (params.layers.empty()) throw ShapeError("mlp_forward: no layers");
  if (x.cols() != params.input_dim()) {
    throw ShapeError("mlp_forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                     std::to_string(params.input_dim()));
  }
  MlpCache cache;
  cache.input = x;
  if (train_mode && params.input_dropout > 0) {
    if (rng == nullptr) throw ArgumentError("mlp_forward: dropout needs a random generator");
    std::bernoulli_distribution keep(1.0 - params.input_dropout);
    const double scale = 1.0 / (1.0 - params.input_dropout);
    cache.dropout_mask.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        cache.dropout_mask(i, j) = keep(*rng) ? scale : 0.0;
      }
    }
    cache.input = cache.input.cwiseProduct(cache.dropout_mask);
  }

  const std::size_t n_layers = params.layers.size();
  Matrix current = cache.input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = params.layers[l];
    Matrix z = current * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    cache.pre.push_back(z);
    if (l + 1 < n_layers) {
      current = z.unaryExpr([&](double v) { return activate(params.activation, params.leaky_slope, v); });
      cache.post.push_back(current);
    }
  }
  cache.logits = cache.pre.back().col(0);
  cache.probs = cache.logits.unaryExpr([](double v) { return sigmoid(v); });
  return cache;
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Vector& dloss_dlogit) {
  const std::size_t n_layers = params.layers.size();
  if (cache.pre.size() != n_layers || dloss_dlogit.size() != cache.logits.size()) {
    throw ShapeError("mlp_backward: cache does not match the parameters or upstream gradient");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.pre[l].cols() != params.layers[l].weight.rows()) {
      throw ShapeError("mlp_backward: stale cache for layer " + std::to_string(l));
    }
  }

  MlpGrads grads;
  grads.layers.resize(n_layers);
  Matrix delta = dloss_dlogit;  // batch x 1
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = params.layers[l];
    const Matrix& layer_input = l == 0 ? cache.input : cache.post[l - 1];
    grads.layers[l].weight = delta.transpose() * layer_input;
    grads.layers[l].bias = delta.colwise().sum().transpose();
    Matrix upstream = delta * layer.weight;
    if (l > 0) {
      const Matrix& pre = cache.pre[l - 1];
      for (Eigen::Index i = 0; i < upstream.rows(); ++i) {
        for (Eigen::Index j = 0; j < upstream.cols(); ++j) {
          upstream(i, j) *= activate_grad(params.activation, params.leaky_slope, pre(i, j));
        }
      }
    }
    delta = std::move(upstream);
  }
  if (cache.dropout_mask.size() > 0) delta = delta.cwiseProduct(cache.dropout_mask);
  grads.input = std::move(delta);
  return grads;
}

void sgd_step(MlpParams& params, const MlpGrads& grads, double lr) {
  if (grads.layers.size() != params.layers.size()) throw ShapeError("sgd_step: layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    sgd_step(params.layers[l].weight, grads.layers[l].weight, lr);
    sgd_step(params.layers[l].bias, grads.layers[l].bias, lr);
  }
}

}  // namespace mwe
