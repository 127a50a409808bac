#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include "mwe/embedding_store.hpp"
#include "mwe/mapping_set.hpp"
#include "mwe/mat_trainer.hpp"
#include "mwe/validator.hpp"

namespace mwe {

/// Pseudo-dictionary for one ordered language pair, as (source rank, target rank).
struct Lexicon {
  std::size_t src = 0;
  std::size_t tgt = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< sorted by source rank

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

/// Mutual CSLS nearest neighbours between the top `cutoff` words of both
/// spaces after mapping them into the shared space. CSLS penalties are taken
/// within the same pools. Ties go to the lower rank on either side.
Lexicon induce_lexicon(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                       const ConstMatrixRef& tgt_encoder, std::size_t cutoff = 15000, std::size_t csls_n = 10);

/// Writes "src_word\ttgt_word" lines.
void write_lexicon_tsv(const Lexicon& lexicon, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       std::ostream& out);

struct MpsrConfig {
  std::size_t epochs = 5;
  std::size_t steps_per_epoch = 10000;
  std::size_t batch_size = 32;
  double lr = 0.1;
  double lr_decay = 0.98;
  double lr_shrink = 0.5;
  std::size_t lexicon_cutoff = 15000;
  std::size_t csls_n = 10;
  bool reinduce_every_epoch = true;
  std::size_t min_lexicon = 50;  ///< smaller lexica are left out of training
  double beta = 0.001;
  bool project_gradients = true;
  std::size_t log_every = 1000;
  std::uint64_t seed = 0;
  ValidationOptions validation;

  void validate() const;
};

/// Adds the gradients of the mean-square loss between M_i x_i and M_j x_j
/// over `batch` (rows of Lex(i, j)) into `grads` and returns the loss. The
/// target encoder receives nothing.
double accumulate_refinement_gradient(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                                      const Lexicon& lexicon,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& batch,
                                      std::vector<Matrix>& grads);

/// Refinement loss of `batch` without updating anything.
double refinement_loss(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                       const Lexicon& lexicon, const std::vector<std::pair<std::size_t, std::size_t>>& batch);

/// Draws `batch` pairs uniformly with replacement from the lexicon.
std::vector<std::pair<std::size_t, std::size_t>> sample_lexicon_batch(const Lexicon& lexicon, std::size_t batch,
                                                                      std::mt19937_64& rng);

/// One refinement update on a single pair: sample, gradient, SGD with `lr`,
/// orthogonalize. An empty lexicon is skipped with a warning and reports 0.
double mpsr_step(const std::vector<EmbeddingSpace>& spaces, MappingSet& mappings, const Lexicon& lexicon,
                 const MpsrConfig& config, double lr, std::mt19937_64& rng);

struct RefineLogRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;
  std::size_t lexicon_pairs = 0;  ///< summed over the pairs used for training
  double val_score = std::numeric_limits<double>::quiet_NaN();
};

void write_refine_log_csv(std::ostream& out, const std::vector<RefineLogRecord>& log);

struct MpsrResult {
  MappingSet best;
  double best_score = 0.0;
  std::size_t best_epoch = 0;
  std::vector<RefineLogRecord> log;
  std::vector<EpochSnapshot> history;  ///< epoch 0 is the input
  std::vector<Lexicon> lexica;         ///< last induced, ordered pairs i != j in row-major order
  double max_orthogonality_residual = 0.0;
};

using RefineLogSink = std::function<void(const RefineLogRecord&)>;

/// Lexica for every ordered pair i != j, row-major.
std::vector<Lexicon> induce_all_lexica(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                                       std::size_t cutoff, std::size_t csls_n);

/// Multilingual pseudo-supervised refinement starting from `initial`.
/// Throws RefinementError when no language pair has a usable lexicon.
MpsrResult train_mpsr(const std::vector<EmbeddingSpace>& spaces, const MappingSet& initial,
                      const MpsrConfig& config, const RefineLogSink& sink = {});

}  // namespace mwe
