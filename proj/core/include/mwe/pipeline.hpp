#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mwe/eval_harness.hpp"
#include "mwe/mat_trainer.hpp"
#include "mwe/mpsr_refiner.hpp"

namespace mwe {

enum class Mode { kMultilingual, kPivot, kDirect, kSupervisedProcrustes };

/// "multilingual", "pivot", "direct", "supervised-procrustes".
Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

struct PipelineConfig {
  MatConfig mat;
  MpsrConfig mpsr;
  bool skip_mpsr = false;
};

struct PipelineResult {
  MappingSet mappings;  ///< MPSR best, or MAT best when refinement is skipped
  double score = 0.0;   ///< validation score of `mappings`
  MatResult mat;
  std::optional<MpsrResult> mpsr;
};

/// MAT followed by MPSR on all languages jointly. MPSR runs with the same
/// seed as MAT unless the configs differ.
PipelineResult train_pipeline(const std::vector<EmbeddingSpace>& spaces, std::size_t target,
                              const PipelineConfig& config, const LogSink& mat_sink = {},
                              const RefineLogSink& mpsr_sink = {});

/// Supervised orthogonal Procrustes: for every non-target language l the
/// encoder solving Procrustes on the entries of dicts[(l, target)] that are
/// in both vocabularies (first listed translation). Throws ArgumentError when
/// a dictionary is missing or has no usable entry.
MappingSet supervised_procrustes(const std::vector<EmbeddingSpace>& spaces, std::size_t target,
                                 const DictionarySet& dicts);

/// Training cost in bilingual-embedding equivalents.
struct CostRecord {
  std::size_t bwe_equivalents = 0;  ///< N-1, 2(N-1) or N(N-1)
  std::size_t training_runs = 0;
  double wall_seconds = 0.0;
};

/// BWE-equivalents needed by `mode` for n languages.
std::size_t bwe_cost(Mode mode, std::size_t n);

struct BaselineOptions {
  Mode mode = Mode::kMultilingual;
  std::size_t target = 0;  ///< shared space for multilingual / supervised modes
  std::size_t pivot = 0;   ///< pivot language for pivot mode
  PipelineConfig pipeline;
  DictionarySet train_dicts;  ///< supervised-procrustes only, keyed (l, target)
  std::size_t threads = 1;    ///< pair runs in parallel (pivot / direct)
};

struct BaselineResult {
  Mode mode = Mode::kMultilingual;
  std::vector<std::string> langs;
  std::vector<PairMapping> maps;  ///< every ordered pair i != j
  CostRecord cost;
  std::optional<MappingSet> joint;  ///< multilingual / supervised modes
};

/// Trains in the requested mode and returns a composite map for every
/// ordered pair. Pivot mode trains l -> pivot and pivot -> l bilingual runs
/// and composes src -> pivot -> tgt; direct mode trains every ordered pair.
/// Pair run r (in row-major pair order) uses seed + r.
BaselineResult run_baseline_comparison(const std::vector<EmbeddingSpace>& spaces, const BaselineOptions& options);

/// Turns one pair map into a two-language mapping set {src, tgt} whose
/// target is tgt, for checkpointing.
MappingSet pair_mapping_set(const std::vector<EmbeddingSpace>& spaces, const PairMapping& map);

}  // namespace mwe
