#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mwe/tensor_core.hpp"

namespace mwe {

enum class Activation { kLeakyRelu, kRelu, kTanh };

struct DenseLayer {
  Matrix weight;  ///< out x in
  Vector bias;    ///< out
};

/// Feed-forward binary classifier: input dropout, hidden layers with a shared
/// activation, and a single output logit passed through a sigmoid.
struct MlpParams {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::kLeakyRelu;
  double leaky_slope = 0.2;
  double input_dropout = 0.1;

  int input_dim() const;
  void validate() const;
};

struct MlpSpec {
  int input_dim = 300;
  std::vector<int> hidden = {2048, 2048};
  Activation activation = Activation::kLeakyRelu;
  double leaky_slope = 0.2;
  double input_dropout = 0.1;
  /// Output layer starts at zero so an untrained classifier predicts 0.5.
  bool zero_output_layer = false;
};

/// Hidden layers use uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.
MlpParams make_mlp(const MlpSpec& spec, std::mt19937_64& rng);

struct MlpCache {
  Matrix input;                   ///< after dropout
  std::vector<Matrix> pre;        ///< pre-activation of every layer
  std::vector<Matrix> post;       ///< activation output of hidden layers
  Matrix dropout_mask;            ///< empty when dropout was not applied
  Vector logits;
  Vector probs;
};

/// Forward pass. Dropout is applied only when `train_mode` is set, and draws
/// from `rng` (which may then not be null).
MlpCache mlp_forward(const MlpParams& params, const ConstMatrixRef& x, bool train_mode,
                     std::mt19937_64* rng = nullptr);

struct MlpGrads {
  std::vector<DenseLayer> layers;
  Matrix input;  ///< d loss / d x (before dropout)
};

/// Backward pass from d loss / d logit (one entry per batch row).
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Vector& dloss_dlogit);

/// In-place SGD update of every layer.
void sgd_step(MlpParams& params, const MlpGrads& grads, double lr);

}  // namespace mwe
