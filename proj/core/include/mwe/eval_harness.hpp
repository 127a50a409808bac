#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mwe/embedding_store.hpp"
#include "mwe/mapping_set.hpp"

namespace mwe {

/// Bilingual dictionary: each source word once, with every acceptable
/// translation in first-seen order.
struct EvalDictionary {
  std::string src_lang;
  std::string tgt_lang;
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;

  std::size_t size() const noexcept { return entries.size(); }
  /// Adds a pair, merging into an existing entry for the same source word.
  void add(const std::string& src, const std::string& tgt);

 private:
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// One "src_word<whitespace>tgt_word" pair per line. Blank lines are ignored.
/// Throws ParseError for a line without two fields or a file without entries.
EvalDictionary load_dictionary(const std::filesystem::path& path, std::string src_lang = {},
                               std::string tgt_lang = {});

struct PrecisionResult {
  std::vector<std::size_t> ks;
  std::vector<std::size_t> hits;    ///< per k
  std::vector<double> precision;    ///< hits / evaluated, per k
  std::size_t evaluated = 0;
  std::size_t total = 0;
  double coverage() const { return total == 0 ? 0.0 : static_cast<double>(evaluated) / static_cast<double>(total); }
  /// Precision at `k`; throws ArgumentError if k was not evaluated.
  double at(std::size_t k) const;
};

/// Word translation by CSLS retrieval in the shared space. Query penalties
/// are computed against the whole mapped target vocabulary and target
/// penalties against the whole mapped source vocabulary. Entries whose source
/// word, or all of whose gold translations, are out of vocabulary are
/// excluded (see coverage). Throws EvalError when nothing is evaluable.
PrecisionResult word_translation_precision(const EvalDictionary& dict, const EmbeddingSpace& src,
                                           const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                                           const ConstMatrixRef& tgt_encoder,
                                           const std::vector<std::size_t>& ks = {1}, std::size_t csls_n = 10);

/// Spearman rank correlation with average ranks for ties. Throws EvalError
/// for fewer than two items, NaN input or a constant vector.
double spearman_rho(const std::vector<double>& pred, const std::vector<double>& gold);

struct SimilarityItem {
  std::string w1;
  std::string w2;
  double gold = 0.0;
};

struct SimilarityDataset {
  std::string lang1;
  std::string lang2;
  std::vector<SimilarityItem> items;
};

/// "word1\tword2\tscore" per line. Throws ParseError on malformed lines,
/// non-finite scores and repeated pairs.
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path, std::string lang1 = {},
                                          std::string lang2 = {});

struct ClwsResult {
  double rho = 0.0;
  std::size_t evaluated = 0;
  std::size_t total = 0;
  double coverage() const { return total == 0 ? 0.0 : static_cast<double>(evaluated) / static_cast<double>(total); }
};

/// Cross-lingual similarity: cosine of the mapped embeddings against the
/// gold scores. Throws EvalError for fewer than two evaluable pairs.
ClwsResult evaluate_clws(const SimilarityDataset& dataset, const EmbeddingSpace& space1,
                         const EmbeddingSpace& space2, const ConstMatrixRef& encoder1,
                         const ConstMatrixRef& encoder2);

struct PairPrecision {
  std::size_t src = 0;
  std::size_t tgt = 0;
  PrecisionResult result;
};

/// Per-pair precision with summary rows: "Single Source" averages each
/// source's row, "Single Target" each target's column, "Overall" all pairs.
struct PrecisionTable {
  std::vector<std::string> langs;
  std::vector<PairPrecision> pairs;

  const PairPrecision* find(std::size_t src, std::size_t tgt) const;
  double single_source(std::size_t lang, std::size_t k = 1) const;
  double single_target(std::size_t lang, std::size_t k = 1) const;
  double overall(std::size_t k = 1) const;
  /// Mean over the pairs satisfying `keep`.
  template <typename Pred>
  double mean_if(Pred keep, std::size_t k = 1) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : pairs) {
      if (!keep(p.src, p.tgt)) continue;
      sum += p.result.at(k);
      ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  }

  /// Source-by-target grid in percent plus the summary rows.
  void print_table(std::ostream& out, std::size_t k = 1) const;
  void print_csv(std::ostream& out) const;
};

/// x_tgt ~ map * x_src for one ordered pair.
struct PairMapping {
  std::size_t src = 0;
  std::size_t tgt = 0;
  Matrix map;
};

/// Composite maps M_tgt^T M_src for every ordered pair of a mapping set.
std::vector<PairMapping> pair_mappings(const MappingSet& mappings);

using DictionarySet = std::map<std::pair<std::size_t, std::size_t>, EvalDictionary>;

/// Evaluates every pair mapping that has a dictionary.
PrecisionTable evaluate_pairs(const std::vector<EmbeddingSpace>& spaces, const std::vector<PairMapping>& maps,
                              const DictionarySet& dicts, const std::vector<std::size_t>& ks = {1},
                              std::size_t csls_n = 10);

struct ClwsRow {
  std::size_t lang1 = 0;
  std::size_t lang2 = 0;
  std::string name;
  ClwsResult result;
};

void print_clws_table(std::ostream& out, const std::vector<std::string>& langs, const std::vector<ClwsRow>& rows);
void print_clws_csv(std::ostream& out, const std::vector<std::string>& langs, const std::vector<ClwsRow>& rows);

}  // namespace mwe
