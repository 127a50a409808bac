#include "mwe/procrustes.hpp"

#include <Eigen/SVD>

#include "mwe/errors.hpp"

namespace mwe {

Matrix procrustes_solve(const ConstMatrixRef& x, const ConstMatrixRef& y) {
  if (x.rows() == 0) throw ArgumentError("procrustes: no training pairs");
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ShapeError("procrustes: x and y must have the same shape");
  const Eigen::MatrixXd cross = y.transpose() * x;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace mwe
