#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "mwe/embedding_store.hpp"
#include "mwe/mapping_set.hpp"

namespace mwe {

struct ValidationOptions {
  std::size_t top_k = 10000;  ///< frequent words on both sides
  std::size_t csls_n = 10;
  /// Weights p_ij for ordered pairs i != j in row-major order (i outer).
  /// Empty means uniform 1 / (N (N - 1)).
  std::vector<double> weights;
};

/// Mean CSLS score of the top_k most frequent source words to their CSLS
/// nearest neighbour among the top_k most frequent target words, with the
/// source translated by M_tgt^T M_src.
double mean_csls(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                 const ConstMatrixRef& tgt_encoder, std::size_t top_k = 10000, std::size_t csls_n = 10);

struct PairValidation {
  std::size_t src = 0;
  std::size_t tgt = 0;
  double mean_csls = 0.0;
  double weight = 0.0;
};

struct ValidationReport {
  std::vector<std::string> langs;
  std::vector<PairValidation> pairs;  ///< sorted by (src, tgt)
  double overall = 0.0;

  void print_table(std::ostream& out) const;
  void print_csv(std::ostream& out) const;
};

/// Unsupervised model-selection score: sum_{i != j} p_ij mean_csls(i -> j).
ValidationReport multilingual_validation(const std::vector<EmbeddingSpace>& spaces,
                                         const std::vector<Matrix>& encoders,
                                         const ValidationOptions& options = {});
ValidationReport multilingual_validation(const std::vector<EmbeddingSpace>& spaces,
                                         const MappingSet& mappings,
                                         const ValidationOptions& options = {});

}  // namespace mwe
