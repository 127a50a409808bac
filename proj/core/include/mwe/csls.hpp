#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "mwe/tensor_core.hpp"

namespace mwe {

inline constexpr int kDefaultCslsNeighbors = 10;
inline constexpr Eigen::Index kDefaultBlockRows = 512;

/// k best keys for one query, best first. Ties go to the lower key index.
struct NeighborResult {
  std::size_t query = 0;
  std::vector<std::size_t> indices;
  std::vector<double> scores;
};

/// Copies `m` with every row scaled to unit length; all-zero rows stay zero.
Matrix normalize_rows(const ConstMatrixRef& m);

/// Cosine similarities against a fixed key set. Each score is a dot product
/// of unit rows accumulated in a fixed order, so a score never depends on
/// which other queries share its block.
class CosineKernel {
 public:
  explicit CosineKernel(const ConstMatrixRef& keys);

  Eigen::Index num_keys() const noexcept { return keys_t_.cols(); }
  int dim() const noexcept { return static_cast<int>(keys_t_.rows()); }

  /// `out` becomes rows(unit_queries) x num_keys().
  void scores(const ConstMatrixRef& unit_queries, Matrix& out) const;

 private:
  Matrix keys_t_;  ///< d x m, unit key rows stored as columns
};

/// Exact top-k keys by cosine for every query row. Throws ArgumentError when
/// k exceeds the number of keys.
std::vector<NeighborResult> cosine_topk(const ConstMatrixRef& queries, const ConstMatrixRef& keys,
                                        std::size_t k, Eigen::Index block_rows = kDefaultBlockRows);

/// For each point, the mean cosine to its n nearest rows of `other_space`.
Vector mean_topk_cosine(const ConstMatrixRef& points, const ConstMatrixRef& other_space, std::size_t n,
                        Eigen::Index block_rows = kDefaultBlockRows);

/// Hubness penalties for both sides of a query/key pairing.
struct CslsPenalties {
  Vector queries;  ///< r_Y(x): mean cosine of each query to its n nearest keys
  Vector keys;     ///< r_X(y): mean cosine of each key to its n nearest queries
};

CslsPenalties csls_penalties(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                             Eigen::Index block_rows = kDefaultBlockRows);

/// Receives a block of CSLS scores for query rows [first_row, first_row + block.rows()).
using CslsBlockSink = std::function<void(Eigen::Index first_row, const Matrix& block)>;

/// CSLS(x, y) = 2 cos(x, y) - r_Y(x) - r_X(y), streamed in row blocks.
/// Penalties are computed with neighborhood size n when not supplied.
void csls_blocks(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                 const CslsBlockSink& sink, const std::optional<CslsPenalties>& penalties = std::nullopt,
                 Eigen::Index block_rows = kDefaultBlockRows);

/// Full q x m CSLS score matrix.
Matrix csls_scores(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                   const std::optional<CslsPenalties>& penalties = std::nullopt,
                   Eigen::Index block_rows = kDefaultBlockRows);

/// Top-k keys by CSLS for every query row.
std::vector<NeighborResult> csls_topk(const ConstMatrixRef& queries, const ConstMatrixRef& keys,
                                      std::size_t n, std::size_t k,
                                      const std::optional<CslsPenalties>& penalties = std::nullopt,
                                      Eigen::Index block_rows = kDefaultBlockRows);

/// Indices of the k largest entries of `row`, descending, ties to lower index.
std::vector<std::size_t> top_k_indices(const double* row, std::size_t size, std::size_t k);

}  // namespace mwe
