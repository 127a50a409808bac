#pragma once

#include "mwe/tensor_core.hpp"

namespace mwe {

/// Orthogonal W minimizing ||x W^T - y||_F, i.e. W maps source row vectors
/// onto target rows. W = U V^T from the SVD of y^T x. Throws ArgumentError
/// for zero rows and ShapeError for mismatched inputs.
Matrix procrustes_solve(const ConstMatrixRef& x, const ConstMatrixRef& y);

}  // namespace mwe
