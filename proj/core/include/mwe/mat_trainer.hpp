#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include "mwe/embedding_store.hpp"
#include "mwe/mapping_set.hpp"
#include "mwe/mlp.hpp"
#include "mwe/validator.hpp"

namespace mwe {

struct MatConfig {
  std::size_t k = 1;  ///< discriminator iterations per mapping iteration
  std::size_t batch_size = 32;
  double dis_lr = 0.1;
  double map_lr = 0.1;
  double lr_decay = 0.98;
  double lr_shrink = 0.5;
  std::size_t epochs = 5;
  std::size_t steps_per_epoch = 10000;
  std::size_t dis_sample_cutoff = 75000;
  double smoothing = 0.1;
  double beta = 0.001;
  bool project_gradients = true;
  std::vector<int> dis_hidden = {2048, 2048};
  double dis_dropout = 0.1;
  double dis_leaky_slope = 0.2;
  std::size_t log_every = 1000;
  std::uint64_t seed = 0;
  ValidationOptions validation;

  /// Throws ArgumentError on any invariant violation.
  void validate() const;
};

/// Mean losses over a logging window, or an end-of-epoch validation line.
struct TrainLogRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double d_loss = 0.0;
  double m_loss = 0.0;
  double d_acc = 0.0;
  double val_score = std::numeric_limits<double>::quiet_NaN();
};

void write_train_log_csv(std::ostream& out, const std::vector<TrainLogRecord>& log);

struct EpochSnapshot {
  std::size_t epoch = 0;  ///< 0 is the state before training
  double val_score = 0.0;
  MappingSet mappings;
};

/// Rows drawn uniformly with replacement from ranks [0, cutoff).
Matrix sample_word_batch(const EmbeddingSpace& space, std::size_t cutoff, std::size_t batch,
                         std::mt19937_64& rng);

struct DiscriminatorStepResult {
  double loss = 0.0;      ///< real term + converted term
  double accuracy = 0.0;  ///< over both halves of the batch
};

/// Multilingual adversarial training state: mappings into the target space
/// plus one language discriminator per language.
class MatTrainer {
 public:
  MatTrainer(const std::vector<EmbeddingSpace>& spaces, std::size_t target, MatConfig config);

  const MappingSet& mappings() const noexcept { return mappings_; }
  MappingSet& mappings() noexcept { return mappings_; }
  const std::vector<MlpParams>& discriminators() const noexcept { return discriminators_; }
  std::vector<MlpParams>& discriminators() noexcept { return discriminators_; }
  const MatConfig& config() const noexcept { return config_; }
  std::mt19937_64& rng() noexcept { return rng_; }

  /// Loss of D_j on real x_j (label 1) and on x_i converted into language j
  /// (label 0), both with label smoothing. Evaluated without dropout.
  double discriminator_loss(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                            const ConstMatrixRef& xj) const;

  /// One SGD update of D_j only; the mappings are read, never written.
  DiscriminatorStepResult discriminator_step(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                                             const ConstMatrixRef& xj);

  /// Adds d/dM of L_d(1, D_j(M_j^T M_i x_i)) into `grads` (one matrix per
  /// language; the target entry is left untouched) and returns the loss.
  double accumulate_mapping_gradient(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                                     std::vector<Matrix>& grads) const;

  /// SGD on every trainable mapping followed by the orthogonalization update.
  void apply_mapping_gradients(const std::vector<Matrix>& grads);

  /// Mapping loss for a fixed batch, without updating anything.
  double mapping_loss(std::size_t i, std::size_t j, const ConstMatrixRef& xi) const;

  /// A complete single-pair mapping update. Discriminators stay frozen.
  double mapping_step(std::size_t i, std::size_t j, const ConstMatrixRef& xi);

  struct StepStats {
    double d_loss = 0.0;
    double m_loss = 0.0;
    double d_acc = 0.0;
  };

  /// k discriminator iterations (each over every language j with a random
  /// source i) followed by one mapping iteration (each language i with a
  /// random j) and orthogonalization.
  StepStats train_step();

  std::vector<Matrix> zero_gradients() const;

  /// Updates per language since construction.
  const std::vector<std::size_t>& discriminator_updates() const noexcept { return dis_updates_; }
  const std::vector<std::size_t>& mapping_updates() const noexcept { return map_updates_; }

  double map_lr() const noexcept { return map_sgd_.lr; }
  double dis_lr() const noexcept { return dis_sgd_.lr; }
  void end_epoch(bool validation_dropped);

 private:
  Matrix convert(std::size_t i, std::size_t j, const ConstMatrixRef& xi) const;

  const std::vector<EmbeddingSpace>& spaces_;
  MatConfig config_;
  MappingSet mappings_;
  std::vector<MlpParams> discriminators_;
  std::mt19937_64 rng_;
  SgdState dis_sgd_;
  SgdState map_sgd_;
  std::vector<std::size_t> dis_updates_;
  std::vector<std::size_t> map_updates_;
};

struct MatResult {
  MappingSet best;
  double best_score = 0.0;
  std::size_t best_epoch = 0;
  std::vector<MlpParams> discriminators;
  std::vector<TrainLogRecord> log;
  std::vector<EpochSnapshot> history;
  double max_orthogonality_residual = 0.0;  ///< over every step
};

using LogSink = std::function<void(const TrainLogRecord&)>;

/// Runs epochs x steps_per_epoch training steps, validating after each epoch
/// and keeping the best-scoring mapping set (the untrained state counts as
/// epoch 0).
MatResult train_mat(const std::vector<EmbeddingSpace>& spaces, std::size_t target, const MatConfig& config,
                    const LogSink& sink = {});

}  // namespace mwe
