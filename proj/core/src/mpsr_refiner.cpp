#include "mwe/mpsr_refiner.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <iomanip>

#include "mwe/csls.hpp"
#include "mwe/errors.hpp"

namespace mwe {

Lexicon induce_lexicon(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const ConstMatrixRef& src_encoder,
                       const ConstMatrixRef& tgt_encoder, std::size_t cutoff, std::size_t csls_n) {
  if (cutoff == 0) throw ArgumentError("induce_lexicon: cutoff must be positive");
  if (csls_n == 0) throw ArgumentError("induce_lexicon: csls_n must be positive");
  Lexicon lex;
  if (src.empty() || tgt.empty()) return lex;
  const Matrix a = map_rows(frequent_slice(src, cutoff), src_encoder);
  const Matrix b = map_rows(frequent_slice(tgt, cutoff), tgt_encoder);
  const std::size_t n = std::min<std::size_t>(csls_n, static_cast<std::size_t>(std::min(a.rows(), b.rows())));

  std::vector<Eigen::Index> row_best(static_cast<std::size_t>(a.rows()), 0);
  std::vector<Eigen::Index> col_best(static_cast<std::size_t>(b.rows()), 0);
  std::vector<double> col_score(static_cast<std::size_t>(b.rows()), -std::numeric_limits<double>::infinity());
  csls_blocks(a, b, n, [&](Eigen::Index first, const Matrix& block) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        const double s = block(r, c);
        if (s > block(r, best)) best = c;
        // rows arrive in increasing order, so strict > keeps the lowest row on ties
        auto& cs = col_score[static_cast<std::size_t>(c)];
        if (s > cs) {
          cs = s;
          col_best[static_cast<std::size_t>(c)] = first + r;
        }
      }
      row_best[static_cast<std::size_t>(first + r)] = best;
    }
  });
  for (std::size_t r = 0; r < row_best.size(); ++r) {
    const auto c = static_cast<std::size_t>(row_best[r]);
    if (static_cast<std::size_t>(col_best[c]) == r) lex.pairs.emplace_back(r, c);
  }
  return lex;
}

void write_lexicon_tsv(const Lexicon& lexicon, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       std::ostream& out) {
  for (const auto& [a, b] : lexicon.pairs) out << src.vocab().word(a) << '\t' << tgt.vocab().word(b) << '\n';
}

void MpsrConfig::validate() const {
  if (batch_size == 0) throw ArgumentError("mpsr: batch_size must be positive");
  if (steps_per_epoch == 0) throw ArgumentError("mpsr: steps_per_epoch must be positive");
  if (!(lr > 0)) throw ArgumentError("mpsr: lr must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ArgumentError("mpsr: lr_decay must lie in (0, 1]");
  if (!(lr_shrink > 0 && lr_shrink <= 1)) throw ArgumentError("mpsr: lr_shrink must lie in (0, 1]");
  if (lexicon_cutoff == 0) throw ArgumentError("mpsr: lexicon_cutoff must be positive");
  if (csls_n == 0) throw ArgumentError("mpsr: csls_n must be positive");
  if (!(beta >= 0)) throw ArgumentError("mpsr: beta must be non-negative");
  if (log_every == 0) throw ArgumentError("mpsr: log_every must be positive");
}

namespace {

struct PairBatch {
  Matrix xi;
  Matrix xj;
};

PairBatch gather(const std::vector<EmbeddingSpace>& spaces, const Lexicon& lexicon,
                 const std::vector<std::pair<std::size_t, std::size_t>>& batch) {
  const EmbeddingSpace& si = spaces.at(lexicon.src);
  const EmbeddingSpace& sj = spaces.at(lexicon.tgt);
  PairBatch out{Matrix(static_cast<Eigen::Index>(batch.size()), si.dim()),
                Matrix(static_cast<Eigen::Index>(batch.size()), sj.dim())};
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    out.xi.row(row) = si.matrix().row(static_cast<Eigen::Index>(batch[b].first));
    out.xj.row(row) = sj.matrix().row(static_cast<Eigen::Index>(batch[b].second));
  }
  return out;
}

}  // namespace

double accumulate_refinement_gradient(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                                      const Lexicon& lexicon,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& batch,
                                      std::vector<Matrix>& grads) {
  if (batch.empty()) return 0.0;
  const std::size_t i = lexicon.src;
  const std::size_t j = lexicon.tgt;
  const PairBatch x = gather(spaces, lexicon, batch);
  const Matrix ti = x.xi * mappings.encoder(i).transpose();
  const Matrix tj = x.xj * mappings.encoder(j).transpose();
  const MseLoss mse = mse_loss(ti, tj);
  if (mappings.trainable(i)) grads.at(i) += mse.grad_a.transpose() * x.xi;
  if (mappings.trainable(j)) grads.at(j) += mse.grad_b.transpose() * x.xj;
  return mse.loss;
}

double refinement_loss(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                       const Lexicon& lexicon, const std::vector<std::pair<std::size_t, std::size_t>>& batch) {
  if (batch.empty()) return 0.0;
  const PairBatch x = gather(spaces, lexicon, batch);
  return mse_loss(x.xi * mappings.encoder(lexicon.src).transpose(),
                  x.xj * mappings.encoder(lexicon.tgt).transpose())
      .loss;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_lexicon_batch(const Lexicon& lexicon, std::size_t batch,
                                                                      std::mt19937_64& rng) {
  if (lexicon.empty()) throw ArgumentError("sample_lexicon_batch: empty lexicon");
  std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) out.push_back(lexicon.pairs[pick(rng)]);
  return out;
}

double mpsr_step(const std::vector<EmbeddingSpace>& spaces, MappingSet& mappings, const Lexicon& lexicon,
                 const MpsrConfig& config, double lr, std::mt19937_64& rng) {
  if (lexicon.empty()) {
    spdlog::warn("mpsr: empty lexicon for {}-{}, skipping", mappings.lang(lexicon.src), mappings.lang(lexicon.tgt));
    return 0.0;
  }
  std::vector<Matrix> grads(mappings.size(), Matrix::Zero(mappings.dim(), mappings.dim()));
  const auto batch = sample_lexicon_batch(lexicon, config.batch_size, rng);
  const double loss = accumulate_refinement_gradient(spaces, mappings, lexicon, batch, grads);
  orthogonal_sgd_step(mappings, grads, lr, config.beta, config.project_gradients);
  return loss;
}

void write_refine_log_csv(std::ostream& out, const std::vector<RefineLogRecord>& log) {
  out << "epoch,step,loss,lexicon_pairs,val_score\n";
  out << std::setprecision(8);
  for (const auto& r : log) {
    out << r.epoch << ',' << r.step << ',' << r.loss << ',' << r.lexicon_pairs << ',';
    if (!std::isnan(r.val_score)) out << r.val_score;
    out << '\n';
  }
}

std::vector<Lexicon> induce_all_lexica(const std::vector<EmbeddingSpace>& spaces, const MappingSet& mappings,
                                       std::size_t cutoff, std::size_t csls_n) {
  std::vector<Lexicon> out;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    for (std::size_t j = 0; j < spaces.size(); ++j) {
      if (i == j) continue;
      Lexicon lex = induce_lexicon(spaces[i], spaces[j], mappings.encoder(i), mappings.encoder(j), cutoff, csls_n);
      lex.src = i;
      lex.tgt = j;
      out.push_back(std::move(lex));
    }
  }
  return out;
}

namespace {

// Usable partners j for each source i, as indices into the row-major lexicon list.
std::vector<std::vector<std::size_t>> usable_pairs(const std::vector<Lexicon>& lexica, std::size_t n,
                                                   const MappingSet& mappings, std::size_t min_size,
                                                   std::size_t& total_pairs) {
  std::vector<std::vector<std::size_t>> out(n);
  total_pairs = 0;
  for (std::size_t p = 0; p < lexica.size(); ++p) {
    const Lexicon& lex = lexica[p];
    if (lex.size() < min_size || lex.empty()) {
      spdlog::warn("mpsr: lexicon {}-{} has {} pairs (< {}), leaving it out", mappings.lang(lex.src),
                   mappings.lang(lex.tgt), lex.size(), min_size);
      continue;
    }
    out[lex.src].push_back(p);
    total_pairs += lex.size();
  }
  return out;
}

}  // namespace

MpsrResult train_mpsr(const std::vector<EmbeddingSpace>& spaces, const MappingSet& initial,
                      const MpsrConfig& config, const RefineLogSink& sink) {
  config.validate();
  const std::size_t n = spaces.size();
  if (n < 2) throw ArgumentError("mpsr: at least two languages are required");
  if (initial.size() != n) throw ArgumentError("mpsr: mapping set does not match the languages");
  if (common_dim(spaces) != initial.dim()) throw ShapeError("mpsr: mapping dimension does not match embeddings");

  MpsrResult result;
  auto emit = [&](const RefineLogRecord& r) {
    result.log.push_back(r);
    if (sink) sink(r);
  };

  MappingSet mappings = initial;
  std::mt19937_64 rng(config.seed);
  SgdState sgd{config.lr, config.lr_decay, config.lr_shrink};

  const double initial_score = multilingual_validation(spaces, mappings, config.validation).overall;
  result.history.push_back({0, initial_score, mappings});
  result.best = mappings;
  result.best_score = initial_score;
  RefineLogRecord start;
  start.val_score = initial_score;
  emit(start);

  std::vector<std::vector<std::size_t>> partners;
  std::size_t lexicon_pairs = 0;
  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (epoch == 1 || config.reinduce_every_epoch) {
      result.lexica = induce_all_lexica(spaces, mappings, config.lexicon_cutoff, config.csls_n);
      partners = usable_pairs(result.lexica, n, mappings, config.min_lexicon, lexicon_pairs);
      if (lexicon_pairs == 0) {
        throw RefinementError("mpsr: no language pair has a usable lexicon (minimum " +
                              std::to_string(config.min_lexicon) + " pairs)");
      }
    }

    double window = 0.0;
    std::size_t in_window = 0;
    for (std::size_t step = 0; step < config.steps_per_epoch; ++step) {
      std::vector<Matrix> grads(n, Matrix::Zero(mappings.dim(), mappings.dim()));
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (partners[i].empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, partners[i].size() - 1);
        const Lexicon& lex = result.lexica[partners[i][pick(rng)]];
        const auto batch = sample_lexicon_batch(lex, config.batch_size, rng);
        loss += accumulate_refinement_gradient(spaces, mappings, lex, batch, grads);
      }
      orthogonal_sgd_step(mappings, grads, sgd.lr, config.beta, config.project_gradients);
      ++global_step;
      result.max_orthogonality_residual =
          std::max(result.max_orthogonality_residual, mappings.max_orthogonality_residual());
      window += loss;
      ++in_window;
      if (in_window == config.log_every || step + 1 == config.steps_per_epoch) {
        RefineLogRecord r;
        r.epoch = epoch;
        r.step = global_step;
        r.loss = window / static_cast<double>(in_window);
        r.lexicon_pairs = lexicon_pairs;
        emit(r);
        window = 0.0;
        in_window = 0;
      }
    }

    const double score = multilingual_validation(spaces, mappings, config.validation).overall;
    result.history.push_back({epoch, score, mappings});
    RefineLogRecord val;
    val.epoch = epoch;
    val.step = global_step;
    val.lexicon_pairs = lexicon_pairs;
    val.val_score = score;
    emit(val);
    const bool dropped = score < result.best_score;
    if (score > result.best_score) {
      result.best_score = score;
      result.best = mappings;
      result.best_epoch = epoch;
    }
    sgd.end_epoch();
    if (dropped) sgd.on_validation_drop();
  }
  return result;
}

}  // namespace mwe
