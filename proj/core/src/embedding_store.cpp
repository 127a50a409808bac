#include "mwe/embedding_store.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mwe/errors.hpp"

namespace mwe {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

// Splits on runs of whitespace.
void split_fields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  for (auto& w : words) {
    if (!push_back(std::move(w))) throw ArgumentError("vocabulary: duplicate token");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::push_back(std::string token) {
  if (index_.find(std::string_view(token)) != index_.end()) return false;
  index_.emplace(token, words_.size());
  words_.push_back(std::move(token));
  return true;
}

EmbeddingSpace::EmbeddingSpace(std::string lang, Vocabulary vocab, Matrix matrix)
    : lang_(std::move(lang)), vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != vocab_.size()) {
    throw ShapeError("embedding space '" + lang_ + "': " + std::to_string(matrix_.rows()) +
                     " rows for " + std::to_string(vocab_.size()) + " words");
  }
  if (!matrix_.allFinite()) throw ArgumentError("embedding space '" + lang_ + "' has non-finite entries");
}

EmbeddingSpace load_text_embeddings(const std::filesystem::path& path, std::size_t max_vocab,
                                    std::string lang) {
  const std::string name = path.string();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + name);

  std::string line;
  std::vector<std::string_view> fields;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  split_fields(line, fields);
  long long count = 0;
  long long dim = 0;
  if (fields.size() != 2 || !parse_number(fields[0], count) || !parse_number(fields[1], dim)) {
    throw ParseError(name, 1, "header must be '<count> <dim>'");
  }
  if (dim <= 0) throw ParseError(name, 1, "dimension must be positive");
  if (count < 0) throw ParseError(name, 1, "count must be non-negative");

  std::size_t limit = static_cast<std::size_t>(count);
  if (max_vocab != kUnlimitedVocab) limit = std::min(limit, max_vocab);

  Vocabulary vocab;
  std::vector<double> values;
  values.reserve(limit * static_cast<std::size_t>(dim));
  std::size_t line_no = 1;
  std::size_t duplicates = 0;
  while (vocab.size() < limit && std::getline(in, line)) {
    ++line_no;
    split_fields(line, fields);
    if (fields.empty()) continue;
    if (fields.size() != static_cast<std::size_t>(dim) + 1) {
      throw ParseError(name, line_no,
                       "expected token and " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() - 1) + " values");
    }
    std::string token(fields[0]);
    if (vocab.contains(token)) {
      ++duplicates;
      spdlog::warn("{}:{}: duplicate token '{}' skipped", name, line_no, token);
      continue;
    }
    const std::size_t start = values.size();
    values.resize(start + static_cast<std::size_t>(dim));
    for (long long k = 0; k < dim; ++k) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(k) + 1], v) || !std::isfinite(v)) {
        throw ParseError(name, line_no, "invalid value '" + std::string(fields[k + 1]) + "'");
      }
      values[start + static_cast<std::size_t>(k)] = v;
    }
    vocab.push_back(std::move(token));
  }
  if (vocab.size() < limit && static_cast<long long>(vocab.size() + duplicates) < count) {
    spdlog::warn("{}: header announces {} rows, found {}", name, count, vocab.size() + duplicates);
  }

  Matrix matrix(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
  if (!values.empty()) {
    matrix = Eigen::Map<const Matrix>(values.data(), matrix.rows(), matrix.cols());
  }
  if (lang.empty()) lang = path.stem().string();
  return EmbeddingSpace(std::move(lang), std::move(vocab), std::move(matrix));
}

void export_mapped_embeddings(const EmbeddingSpace& space, const ConstMatrixRef& mapping,
                              const std::filesystem::path& path) {
  if (mapping.rows() != space.dim() || mapping.cols() != space.dim()) {
    throw ShapeError("export: mapping must be " + std::to_string(space.dim()) + "x" +
                     std::to_string(space.dim()));
  }
  const Matrix mapped = map_rows(space.matrix(), mapping);
  std::FILE* out = std::fopen(path.string().c_str(), "wb");
  if (out == nullptr) throw IoError("cannot write " + path.string());
  bool ok = std::fprintf(out, "%zu %d\n", space.size(), space.dim()) > 0;
  for (Eigen::Index r = 0; ok && r < mapped.rows(); ++r) {
    ok = std::fputs(space.vocab().word(static_cast<std::size_t>(r)).c_str(), out) >= 0;
    for (Eigen::Index c = 0; ok && c < mapped.cols(); ++c) {
      ok = std::fprintf(out, " %.6g", mapped(r, c)) > 0;
    }
    ok = ok && std::fputc('\n', out) != EOF;
  }
  if (std::fclose(out) != 0) ok = false;
  if (!ok) throw IoError("write failed for " + path.string());
}

ConstMatrixRef frequent_slice(const EmbeddingSpace& space, std::size_t top_k) {
  const auto rows = static_cast<Eigen::Index>(std::min(top_k, space.size()));
  return space.matrix().topRows(rows);
}

Matrix map_rows(const ConstMatrixRef& rows, const ConstMatrixRef& m) {
  if (m.cols() != rows.cols()) {
    throw ShapeError("map_rows: mapping has " + std::to_string(m.cols()) + " columns, rows have " +
                     std::to_string(rows.cols()));
  }
  const Eigen::Index n = rows.rows();
  const Eigen::Index in = rows.cols();
  const Eigen::Index out_dim = m.rows();
  Matrix out(n, out_dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double* x = rows.data() + r * rows.outerStride();
    for (Eigen::Index o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < in; ++k) acc += m(o, k) * x[k];
      out(r, o) = acc;
    }
  }
  return out;
}

int common_dim(const std::vector<EmbeddingSpace>& spaces) {
  if (spaces.empty()) throw ArgumentError("no embedding spaces");
  const int d = spaces.front().dim();
  for (const auto& s : spaces) {
    if (s.dim() != d) {
      throw ShapeError("embedding dimension mismatch: '" + spaces.front().lang() + "' has " +
                       std::to_string(d) + ", '" + s.lang() + "' has " + std::to_string(s.dim()));
    }
  }
  return d;
}

}  // namespace mwe
