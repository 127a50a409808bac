#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwe/tensor_core.hpp"

namespace mwe {

/// Tokens in frequency order; rank 0 is the most frequent word.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws ArgumentError on duplicate tokens.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::string& word(std::size_t rank) const { return words_.at(rank); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  /// Appends a token; returns false (and leaves the vocabulary unchanged) if
  /// it is already present.
  bool push_back(std::string token);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// One language's vocabulary and its |V| x d embedding matrix. Immutable
/// once constructed.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  /// Throws ShapeError if the row count differs from the vocabulary size and
  /// ArgumentError if any entry is not finite.
  EmbeddingSpace(std::string lang, Vocabulary vocab, Matrix matrix);

  const std::string& lang() const noexcept { return lang_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  int dim() const noexcept { return static_cast<int>(matrix_.cols()); }
  std::size_t size() const noexcept { return vocab_.size(); }
  bool empty() const noexcept { return vocab_.empty(); }

 private:
  std::string lang_;
  Vocabulary vocab_;
  Matrix matrix_;
};

inline constexpr std::size_t kDefaultMaxVocab = 200000;
inline constexpr std::size_t kUnlimitedVocab = 0;

/// Reads the word2vec text format: a "<count> <dim>" header followed by
/// "<token> <dim floats>" rows. Keeps at most `max_vocab` distinct tokens
/// (`kUnlimitedVocab` keeps all); repeated tokens keep their first row.
EmbeddingSpace load_text_embeddings(const std::filesystem::path& path,
                                    std::size_t max_vocab = kDefaultMaxVocab,
                                    std::string lang = {});

/// Writes rows x M^T in the same text format with 6 significant digits.
void export_mapped_embeddings(const EmbeddingSpace& space, const ConstMatrixRef& mapping,
                              const std::filesystem::path& path);

/// First min(top_k, |V|) rows, as a view of the space's matrix.
ConstMatrixRef frequent_slice(const EmbeddingSpace& space, std::size_t top_k);

/// rows * m^T with every entry summed in a fixed order, so a row's image does
/// not depend on how many rows are mapped together.
Matrix map_rows(const ConstMatrixRef& rows, const ConstMatrixRef& m);

/// Checks that every space has the same dimension; returns it.
int common_dim(const std::vector<EmbeddingSpace>& spaces);

}  // namespace mwe
