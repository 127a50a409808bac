#include "mwe/mat_trainer.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <iomanip>

#include "mwe/errors.hpp"

namespace mwe {

void MatConfig::validate() const {
  if (k == 0) throw ArgumentError("mat: k must be positive");
  if (batch_size == 0) throw ArgumentError("mat: batch_size must be positive");
  if (!(dis_lr > 0) || !(map_lr > 0)) throw ArgumentError("mat: learning rates must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ArgumentError("mat: lr_decay must lie in (0, 1]");
  if (!(lr_shrink > 0 && lr_shrink <= 1)) throw ArgumentError("mat: lr_shrink must lie in (0, 1]");
  if (steps_per_epoch == 0) throw ArgumentError("mat: steps_per_epoch must be positive");
  if (dis_sample_cutoff == 0) throw ArgumentError("mat: dis_sample_cutoff must be positive");
  if (!(smoothing >= 0 && smoothing < 0.5)) throw ArgumentError("mat: smoothing must lie in [0, 0.5)");
  if (!(beta >= 0)) throw ArgumentError("mat: beta must be non-negative");
  if (!(dis_dropout >= 0 && dis_dropout < 1)) throw ArgumentError("mat: dis_dropout must lie in [0, 1)");
  for (int h : dis_hidden) {
    if (h < 1) throw ArgumentError("mat: discriminator widths must be positive");
  }
  if (log_every == 0) throw ArgumentError("mat: log_every must be positive");
}

void write_train_log_csv(std::ostream& out, const std::vector<TrainLogRecord>& log) {
  out << "epoch,step,d_loss,m_loss,d_acc,val_score\n";
  out << std::setprecision(8);
  for (const auto& r : log) {
    out << r.epoch << ',' << r.step << ',' << r.d_loss << ',' << r.m_loss << ',' << r.d_acc << ',';
    if (!std::isnan(r.val_score)) out << r.val_score;
    out << '\n';
  }
}

Matrix sample_word_batch(const EmbeddingSpace& space, std::size_t cutoff, std::size_t batch,
                         std::mt19937_64& rng) {
  if (space.empty()) throw ArgumentError("sample_word_batch: empty vocabulary");
  cutoff = std::min(cutoff, space.size());
  if (cutoff == 0) throw ArgumentError("sample_word_batch: cutoff must be positive");
  std::uniform_int_distribution<std::size_t> rank(0, cutoff - 1);
  Matrix out(static_cast<Eigen::Index>(batch), space.dim());
  for (std::size_t b = 0; b < batch; ++b) {
    out.row(static_cast<Eigen::Index>(b)) = space.matrix().row(static_cast<Eigen::Index>(rank(rng)));
  }
  return out;
}

namespace {

std::size_t pick_language(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> lang(0, n - 1);
  return lang(rng);
}

}  // namespace

MatTrainer::MatTrainer(const std::vector<EmbeddingSpace>& spaces, std::size_t target, MatConfig config)
    : spaces_(spaces), config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  if (spaces_.size() < 2) throw ArgumentError("mat: at least two languages are required");
  const int d = common_dim(spaces_);
  std::vector<std::string> langs;
  for (const auto& s : spaces_) {
    if (s.empty()) throw ArgumentError("mat: language '" + s.lang() + "' has an empty vocabulary");
    langs.push_back(s.lang());
  }
  mappings_ = MappingSet(std::move(langs), target, d);

  MlpSpec spec;
  spec.input_dim = d;
  spec.hidden = config_.dis_hidden;
  spec.leaky_slope = config_.dis_leaky_slope;
  spec.input_dropout = config_.dis_dropout;
  for (std::size_t l = 0; l < spaces_.size(); ++l) discriminators_.push_back(make_mlp(spec, rng_));

  dis_sgd_ = SgdState{config_.dis_lr, config_.lr_decay, config_.lr_shrink};
  map_sgd_ = SgdState{config_.map_lr, config_.lr_decay, config_.lr_shrink};
  dis_updates_.assign(spaces_.size(), 0);
  map_updates_.assign(spaces_.size(), 0);
}

Matrix MatTrainer::convert(std::size_t i, std::size_t j, const ConstMatrixRef& xi) const {
  if (xi.cols() != mappings_.dim()) throw ShapeError("mat: batch dimension does not match the mappings");
  // Row form of x_hat = M_j^T M_i x.
  const Matrix composed = mappings_.encoder(j).transpose() * mappings_.encoder(i);
  return xi * composed.transpose();
}

double MatTrainer::discriminator_loss(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                                      const ConstMatrixRef& xj) const {
  if (xj.cols() != mappings_.dim()) throw ShapeError("mat: batch dimension does not match the mappings");
  const Matrix fake = convert(i, j, xi);
  const MlpParams& dis = discriminators_.at(j);
  const auto real_out = mlp_forward(dis, xj, false);
  const auto fake_out = mlp_forward(dis, fake, false);
  double real_loss = 0.0;
  double fake_loss = 0.0;
  for (Eigen::Index b = 0; b < real_out.probs.size(); ++b) {
    real_loss += cross_entropy(1.0 - config_.smoothing, real_out.probs(b)).loss;
  }
  for (Eigen::Index b = 0; b < fake_out.probs.size(); ++b) {
    fake_loss += cross_entropy(config_.smoothing, fake_out.probs(b)).loss;
  }
  return real_loss / static_cast<double>(real_out.probs.size()) +
         fake_loss / static_cast<double>(fake_out.probs.size());
}

DiscriminatorStepResult MatTrainer::discriminator_step(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                                                       const ConstMatrixRef& xj) {
  if (xj.cols() != mappings_.dim()) throw ShapeError("mat: batch dimension does not match the mappings");
  const Matrix fake = convert(i, j, xi);
  MlpParams& dis = discriminators_.at(j);

  DiscriminatorStepResult result;
  std::size_t correct = 0;
  auto half = [&](const ConstMatrixRef& x, double target, bool real) {
    const auto cache = mlp_forward(dis, x, true, &rng_);
    const auto batch = static_cast<double>(x.rows());
    Vector dlogit(x.rows());
    double loss = 0.0;
    for (Eigen::Index b = 0; b < x.rows(); ++b) {
      const auto ce = cross_entropy(target, cache.probs(b));
      loss += ce.loss;
      dlogit(b) = ce.dlogit / batch;
      if ((cache.probs(b) > 0.5) == real) ++correct;
    }
    result.loss += loss / batch;
    return mlp_backward(dis, cache, dlogit);
  };
  const MlpGrads real_grads = half(xj, 1.0 - config_.smoothing, true);
  const MlpGrads fake_grads = half(fake, config_.smoothing, false);
  sgd_step(dis, real_grads, dis_sgd_.lr);
  sgd_step(dis, fake_grads, dis_sgd_.lr);
  ++dis_updates_[j];
  result.accuracy = static_cast<double>(correct) / static_cast<double>(xi.rows() + xj.rows());
  return result;
}

std::vector<Matrix> MatTrainer::zero_gradients() const {
  return std::vector<Matrix>(mappings_.size(), Matrix::Zero(mappings_.dim(), mappings_.dim()));
}

double MatTrainer::accumulate_mapping_gradient(std::size_t i, std::size_t j, const ConstMatrixRef& xi,
                                               std::vector<Matrix>& grads) const {
  const Matrix fake = convert(i, j, xi);
  const auto cache = mlp_forward(discriminators_.at(j), fake, false);
  const auto batch = static_cast<double>(xi.rows());
  Vector dlogit(xi.rows());
  double loss = 0.0;
  for (Eigen::Index b = 0; b < xi.rows(); ++b) {
    const auto ce = cross_entropy(1.0, cache.probs(b));
    loss += ce.loss;
    dlogit(b) = ce.dlogit / batch;
  }
  const MlpGrads back = mlp_backward(discriminators_.at(j), cache, dlogit);
  // x_hat = C x with C = M_j^T M_i, so dL/dC = G^T X.
  const Matrix d_composed = back.input.transpose() * xi;
  if (mappings_.trainable(i)) grads.at(i) += mappings_.encoder(j) * d_composed;
  if (mappings_.trainable(j)) grads.at(j) += mappings_.encoder(i) * d_composed.transpose();
  return loss / batch;
}

void MatTrainer::apply_mapping_gradients(const std::vector<Matrix>& grads) {
  orthogonal_sgd_step(mappings_, grads, map_sgd_.lr, config_.beta, config_.project_gradients);
  for (std::size_t l = 0; l < mappings_.size(); ++l) {
    if (mappings_.trainable(l)) ++map_updates_[l];
  }
}

double MatTrainer::mapping_loss(std::size_t i, std::size_t j, const ConstMatrixRef& xi) const {
  const auto cache = mlp_forward(discriminators_.at(j), convert(i, j, xi), false);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < cache.probs.size(); ++b) loss += cross_entropy(1.0, cache.probs(b)).loss;
  return loss / static_cast<double>(cache.probs.size());
}

double MatTrainer::mapping_step(std::size_t i, std::size_t j, const ConstMatrixRef& xi) {
  auto grads = zero_gradients();
  const double loss = accumulate_mapping_gradient(i, j, xi, grads);
  apply_mapping_gradients(grads);
  return loss;
}

MatTrainer::StepStats MatTrainer::train_step() {
  const std::size_t n = spaces_.size();
  StepStats stats;
  for (std::size_t iter = 0; iter < config_.k; ++iter) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t i = pick_language(n, rng_);
      const Matrix xi = sample_word_batch(spaces_[i], config_.dis_sample_cutoff, config_.batch_size, rng_);
      const Matrix xj = sample_word_batch(spaces_[j], config_.dis_sample_cutoff, config_.batch_size, rng_);
      const auto r = discriminator_step(i, j, xi, xj);
      stats.d_loss += r.loss;
      stats.d_acc += r.accuracy;
    }
  }
  stats.d_acc /= static_cast<double>(config_.k * n);
  stats.d_loss /= static_cast<double>(config_.k);

  auto grads = zero_gradients();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick_language(n, rng_);
    const Matrix xi = sample_word_batch(spaces_[i], config_.dis_sample_cutoff, config_.batch_size, rng_);
    stats.m_loss += accumulate_mapping_gradient(i, j, xi, grads);
  }
  apply_mapping_gradients(grads);
  return stats;
}

void MatTrainer::end_epoch(bool validation_dropped) {
  dis_sgd_.end_epoch();
  map_sgd_.end_epoch();
  if (validation_dropped) {
    dis_sgd_.on_validation_drop();
    map_sgd_.on_validation_drop();
  }
}

MatResult train_mat(const std::vector<EmbeddingSpace>& spaces, std::size_t target, const MatConfig& config,
                    const LogSink& sink) {
  MatTrainer trainer(spaces, target, config);
  MatResult result;
  auto emit = [&](const TrainLogRecord& r) {
    result.log.push_back(r);
    if (sink) sink(r);
  };

  const double initial = multilingual_validation(spaces, trainer.mappings(), config.validation).overall;
  result.history.push_back({0, initial, trainer.mappings()});
  result.best = trainer.mappings();
  result.best_score = initial;
  result.best_epoch = 0;
  TrainLogRecord start;
  start.val_score = initial;
  emit(start);

  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    TrainLogRecord window;
    std::size_t in_window = 0;
    for (std::size_t step = 0; step < config.steps_per_epoch; ++step) {
      const auto stats = trainer.train_step();
      ++global_step;
      result.max_orthogonality_residual =
          std::max(result.max_orthogonality_residual, trainer.mappings().max_orthogonality_residual());
      if (!std::isfinite(stats.d_loss) || !std::isfinite(stats.m_loss)) {
        spdlog::warn("mat: non-finite loss at epoch {} step {}", epoch, global_step);
      }
      window.d_loss += stats.d_loss;
      window.m_loss += stats.m_loss;
      window.d_acc += stats.d_acc;
      ++in_window;
      if (in_window == config.log_every || step + 1 == config.steps_per_epoch) {
        window.epoch = epoch;
        window.step = global_step;
        window.d_loss /= static_cast<double>(in_window);
        window.m_loss /= static_cast<double>(in_window);
        window.d_acc /= static_cast<double>(in_window);
        emit(window);
        window = TrainLogRecord{};
        in_window = 0;
      }
    }
    const double score = multilingual_validation(spaces, trainer.mappings(), config.validation).overall;
    result.history.push_back({epoch, score, trainer.mappings()});
    TrainLogRecord val;
    val.epoch = epoch;
    val.step = global_step;
    val.val_score = score;
    emit(val);
    const bool dropped = score < result.best_score;
    if (score > result.best_score) {
      result.best_score = score;
      result.best = trainer.mappings();
      result.best_epoch = epoch;
    }
    trainer.end_epoch(dropped);
  }
  result.discriminators = trainer.discriminators();
  return result;
}

}  // namespace mwe
