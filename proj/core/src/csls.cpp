#include "mwe/csls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mwe/errors.hpp"

namespace mwe {

namespace {

void check_dims(const ConstMatrixRef& queries, const ConstMatrixRef& keys, const char* op) {
  if (queries.cols() != keys.cols()) {
    throw ShapeError(std::string(op) + ": queries have " + std::to_string(queries.cols()) +
                     " columns, keys have " + std::to_string(keys.cols()));
  }
}

void check_k(std::size_t k, Eigen::Index keys, const char* op, const char* what) {
  if (k == 0) throw ArgumentError(std::string(op) + ": " + what + " must be positive");
  if (k > static_cast<std::size_t>(keys)) {
    throw ArgumentError(std::string(op) + ": " + what + "=" + std::to_string(k) + " exceeds " +
                        std::to_string(keys) + " candidates");
  }
}

Eigen::Index clamp_block(Eigen::Index block_rows) { return std::max<Eigen::Index>(1, block_rows); }

NeighborResult make_result(std::size_t query, const double* row, std::size_t size, std::size_t k) {
  NeighborResult result;
  result.query = query;
  result.indices = top_k_indices(row, size, k);
  result.scores.reserve(k);
  for (auto idx : result.indices) result.scores.push_back(row[idx]);
  return result;
}

}  // namespace

std::vector<std::size_t> top_k_indices(const double* row, std::size_t size, std::size_t k) {
  k = std::min(k, size);
  auto better = [row](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  };
  if (k <= 16) {
    // one pass keeping a sorted shortlist; a later index only enters on a
    // strictly higher score, which keeps ties on the lower index
    std::vector<std::size_t> best;
    best.reserve(k + 1);
    for (std::size_t i = 0; i < size && best.size() < k; ++i) {
      best.insert(std::upper_bound(best.begin(), best.end(), i, better), i);
    }
    if (k == 0) return best;
    for (std::size_t i = k; i < size; ++i) {
      if (!(row[i] > row[best.back()])) continue;
      best.insert(std::upper_bound(best.begin(), best.end(), i, better), i);
      best.pop_back();
    }
    return best;
  }
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (k < size) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    order.resize(k);
  }
  std::sort(order.begin(), order.end(), better);
  return order;
}

Matrix normalize_rows(const ConstMatrixRef& m) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double sq = 0.0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) sq += out(r, c) * out(r, c);
    if (sq > 0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) *= inv;
    }
  }
  return out;
}

CosineKernel::CosineKernel(const ConstMatrixRef& keys) : keys_t_(normalize_rows(keys).transpose()) {}

void CosineKernel::scores(const ConstMatrixRef& unit_queries, Matrix& out) const {
  if (unit_queries.cols() != keys_t_.rows()) {
    throw ShapeError("cosine kernel: query dimension " + std::to_string(unit_queries.cols()) +
                     " != key dimension " + std::to_string(keys_t_.rows()));
  }
  const Eigen::Index q = unit_queries.rows();
  const Eigen::Index m = keys_t_.cols();
  const Eigen::Index d = keys_t_.rows();
  out.setZero(q, m);
  // Each entry accumulates over k = 0..d-1 in order; the inner loops run over
  // independent entries, so neither vectorization nor the 4-row grouping
  // reorders any sum.
  Eigen::Index i = 0;
  for (; i + 4 <= q; i += 4) {
    double* d0 = &out(i, 0);
    double* d1 = &out(i + 1, 0);
    double* d2 = &out(i + 2, 0);
    double* d3 = &out(i + 3, 0);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double a0 = unit_queries(i, k);
      const double a1 = unit_queries(i + 1, k);
      const double a2 = unit_queries(i + 2, k);
      const double a3 = unit_queries(i + 3, k);
      const double* src = &keys_t_(k, 0);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double s = src[j];
        d0[j] += a0 * s;
        d1[j] += a1 * s;
        d2[j] += a2 * s;
        d3[j] += a3 * s;
      }
    }
  }
  for (; i < q; ++i) {
    double* dst = &out(i, 0);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double a = unit_queries(i, k);
      const double* src = &keys_t_(k, 0);
      for (Eigen::Index j = 0; j < m; ++j) dst[j] += a * src[j];
    }
  }
}

std::vector<NeighborResult> cosine_topk(const ConstMatrixRef& queries, const ConstMatrixRef& keys,
                                        std::size_t k, Eigen::Index block_rows) {
  check_dims(queries, keys, "cosine_topk");
  check_k(k, keys.rows(), "cosine_topk", "k");
  block_rows = clamp_block(block_rows);
  const CosineKernel kernel(keys);
  const Matrix unit = normalize_rows(queries);
  std::vector<NeighborResult> results;
  results.reserve(static_cast<std::size_t>(queries.rows()));
  Matrix block;
  for (Eigen::Index start = 0; start < unit.rows(); start += block_rows) {
    const Eigen::Index rows = std::min(block_rows, unit.rows() - start);
    kernel.scores(unit.middleRows(start, rows), block);
    for (Eigen::Index r = 0; r < rows; ++r) {
      results.push_back(make_result(static_cast<std::size_t>(start + r), &block(r, 0),
                                    static_cast<std::size_t>(block.cols()), k));
    }
  }
  return results;
}

Vector mean_topk_cosine(const ConstMatrixRef& points, const ConstMatrixRef& other_space, std::size_t n,
                        Eigen::Index block_rows) {
  check_dims(points, other_space, "mean_topk_cosine");
  check_k(n, other_space.rows(), "mean_topk_cosine", "n");
  block_rows = clamp_block(block_rows);
  const CosineKernel kernel(other_space);
  const Matrix unit = normalize_rows(points);
  Vector out(points.rows());
  Matrix block;
  for (Eigen::Index start = 0; start < unit.rows(); start += block_rows) {
    const Eigen::Index rows = std::min(block_rows, unit.rows() - start);
    kernel.scores(unit.middleRows(start, rows), block);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double* row = &block(r, 0);
      const auto best = top_k_indices(row, static_cast<std::size_t>(block.cols()), n);
      double sum = 0.0;
      for (auto idx : best) sum += row[idx];
      out(start + r) = sum / static_cast<double>(n);
    }
  }
  return out;
}

CslsPenalties csls_penalties(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                             Eigen::Index block_rows) {
  CslsPenalties p;
  p.queries = mean_topk_cosine(queries, keys, n, block_rows);
  p.keys = mean_topk_cosine(keys, queries, n, block_rows);
  return p;
}

void csls_blocks(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                 const CslsBlockSink& sink, const std::optional<CslsPenalties>& penalties,
                 Eigen::Index block_rows) {
  check_dims(queries, keys, "csls");
  CslsPenalties computed;
  const CslsPenalties* pen = nullptr;
  if (penalties) {
    if (penalties->queries.size() != queries.rows() || penalties->keys.size() != keys.rows()) {
      throw ArgumentError("csls: penalty lengths do not match queries/keys");
    }
    pen = &*penalties;
  } else {
    computed = csls_penalties(queries, keys, n, block_rows);
    pen = &computed;
  }
  block_rows = clamp_block(block_rows);
  const CosineKernel kernel(keys);
  const Matrix unit = normalize_rows(queries);
  Matrix block;
  for (Eigen::Index start = 0; start < unit.rows(); start += block_rows) {
    const Eigen::Index rows = std::min(block_rows, unit.rows() - start);
    kernel.scores(unit.middleRows(start, rows), block);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double rq = pen->queries(start + r);
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        // (rq + rk) keeps the score exactly symmetric in its two arguments.
        block(r, c) = 2.0 * block(r, c) - (rq + pen->keys(c));
      }
    }
    sink(start, block);
  }
}

Matrix csls_scores(const ConstMatrixRef& queries, const ConstMatrixRef& keys, std::size_t n,
                   const std::optional<CslsPenalties>& penalties, Eigen::Index block_rows) {
  Matrix out(queries.rows(), keys.rows());
  csls_blocks(
      queries, keys, n,
      [&out](Eigen::Index first, const Matrix& block) { out.middleRows(first, block.rows()) = block; },
      penalties, block_rows);
  return out;
}

std::vector<NeighborResult> csls_topk(const ConstMatrixRef& queries, const ConstMatrixRef& keys,
                                      std::size_t n, std::size_t k,
                                      const std::optional<CslsPenalties>& penalties,
                                      Eigen::Index block_rows) {
  check_k(k, keys.rows(), "csls_topk", "k");
  std::vector<NeighborResult> results;
  results.reserve(static_cast<std::size_t>(queries.rows()));
  csls_blocks(
      queries, keys, n,
      [&](Eigen::Index first, const Matrix& block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r) {
          results.push_back(make_result(static_cast<std::size_t>(first + r), &block(r, 0),
                                        static_cast<std::size_t>(block.cols()), k));
        }
      },
      penalties, block_rows);
  return results;
}

}  // namespace mwe
