#include "mwe/tensor_core.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mwe/errors.hpp"

namespace mwe {

namespace {

std::string shape(const ConstMatrixRef& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix matmul(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + shape(a) + " * " + shape(b) + ")");
  }
  return a * b;
}

Matrix orthogonalize_update(const ConstMatrixRef& m, double beta) {
  if (m.rows() != m.cols()) {
    throw ShapeError("orthogonalize_update: matrix is not square (" + shape(m) + ")");
  }
  Matrix mmt_m = (m * m.transpose()) * m;
  return (1.0 + beta) * m - beta * mmt_m;
}

double orthogonality_residual(const ConstMatrixRef& m) {
  Matrix r = m.transpose() * m;
  r.diagonal().array() -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

double orthogonality_residual_fro(const ConstMatrixRef& m) {
  Matrix r = m.transpose() * m;
  r.diagonal().array() -= 1.0;
  return r.norm();
}

Matrix tangent_project(const ConstMatrixRef& m, const ConstMatrixRef& g) {
  if (m.rows() != g.rows() || m.cols() != g.cols()) {
    throw ShapeError("tangent_project: gradient " + shape(g) + " does not match " + shape(m));
  }
  Matrix s = m.transpose() * g;
  Matrix skew = 0.5 * (s - s.transpose());
  return m * skew;
}

Matrix random_orthogonal(int d, std::uint64_t seed) {
  if (d < 1) throw ArgumentError("random_orthogonal: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

CrossEntropy cross_entropy(double y, double p) {
  const double pc = std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
  CrossEntropy out;
  out.loss = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  out.dlogit = p - y;
  return out;
}

MseLoss mse_loss(const ConstMatrixRef& a, const ConstMatrixRef& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("mse_loss: " + shape(a) + " vs " + shape(b));
  }
  MseLoss out;
  const double count = static_cast<double>(a.size());
  if (count == 0) {
    out.grad_a = Matrix::Zero(a.rows(), a.cols());
    out.grad_b = out.grad_a;
    return out;
  }
  Matrix diff = a - b;
  out.loss = diff.squaredNorm() / count;
  out.grad_a = (2.0 / count) * diff;
  out.grad_b = -out.grad_a;
  return out;
}

void SgdState::validate() const {
  if (!(lr > 0)) throw ArgumentError("learning rate must be positive");
  if (!(decay > 0 && decay <= 1)) throw ArgumentError("lr decay must lie in (0, 1]");
  if (!(shrink > 0 && shrink <= 1)) throw ArgumentError("lr shrink must lie in (0, 1]");
}

void SgdState::end_epoch() { lr = std::max(min_lr, lr * decay); }

void SgdState::on_validation_drop() { lr = std::max(min_lr, lr * shrink); }

void sgd_step(Matrix& theta, const ConstMatrixRef& grad, double lr) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols()) {
    throw ShapeError("sgd_step: gradient " + shape(grad) + " does not match parameter " +
                     shape(theta));
  }
  theta.noalias() -= lr * grad;
}

void sgd_step(Vector& theta, const Vector& grad, double lr) {
  if (theta.size() != grad.size()) throw ShapeError("sgd_step: vector length mismatch");
  theta.noalias() -= lr * grad;
}

}  // namespace mwe
