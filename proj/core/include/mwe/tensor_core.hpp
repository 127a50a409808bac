#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace mwe {

/// Dense row-major matrix. Embedding matrices keep one word per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ConstMatrixRef = Eigen::Ref<const Matrix>;

/// a * b with explicit shape checking. Throws ShapeError on mismatch.
Matrix matmul(const ConstMatrixRef& a, const ConstMatrixRef& b);

/// One step toward the orthogonal manifold: (1 + beta) m - beta m m^T m.
Matrix orthogonalize_update(const ConstMatrixRef& m, double beta);

/// max_{ij} |(m^T m - I)_{ij}|
double orthogonality_residual(const ConstMatrixRef& m);

/// Frobenius norm of m^T m - I.
double orthogonality_residual_fro(const ConstMatrixRef& m);

/// Projects a Euclidean gradient onto the tangent space of the orthogonal
/// group at `m`: m * skew(m^T g).
Matrix tangent_project(const ConstMatrixRef& m, const ConstMatrixRef& g);

/// Random orthogonal matrix: QR of a seeded standard Gaussian matrix with
/// the sign of each column fixed so that R has a positive diagonal.
Matrix random_orthogonal(int d, std::uint64_t seed);

inline constexpr double kProbabilityEpsilon = 1e-7;

struct CrossEntropy {
  double loss = 0.0;
  double dlogit = 0.0;  ///< d loss / d pre-sigmoid logit
};

/// Binary cross entropy of probability `p` against target `y` in [0, 1].
/// `p` is clamped to [eps, 1 - eps]; the logit gradient is p - y.
CrossEntropy cross_entropy(double y, double p);

struct MseLoss {
  double loss = 0.0;
  Matrix grad_a;  ///< d loss / d a
  Matrix grad_b;  ///< d loss / d b
};

/// Mean over all entries of (a - b)^2.
MseLoss mse_loss(const ConstMatrixRef& a, const ConstMatrixRef& b);

double sigmoid(double x);

/// Learning-rate schedule shared by the trainers.
struct SgdState {
  double lr = 0.1;
  double decay = 0.98;   ///< multiplied into lr once per epoch
  double shrink = 0.5;   ///< multiplied into lr when validation drops
  double min_lr = 1e-6;

  void validate() const;
  void end_epoch();
  void on_validation_drop();
};

/// theta <- theta - lr * grad. Throws ShapeError on mismatch.
void sgd_step(Matrix& theta, const ConstMatrixRef& grad, double lr);
void sgd_step(Vector& theta, const Vector& grad, double lr);

}  // namespace mwe
