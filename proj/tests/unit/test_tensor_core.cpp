#include <mwe/errors.hpp>
#include <mwe/tensor_core.hpp>

#include "test_util.hpp"

using namespace mwe;

TEST(Matmul, ChecksShapes) {
  EXPECT_THROW(matmul(Matrix::Zero(2, 3), Matrix::Zero(2, 3)), ShapeError);
  Matrix a(1, 2), b(2, 1);
  a << 1, 2;
  b << 3, 4;
  EXPECT_EQ(matmul(a, b)(0, 0), 11.0);
}

TEST(OrthogonalizeUpdate, FixedPointOnOrthogonal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix q = random_orthogonal(16, seed);
    EXPECT_LT(orthogonality_residual(q), 1e-12);
    EXPECT_LT((orthogonalize_update(q, 0.001) - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(OrthogonalizeUpdate, ContractsTowardManifold) {
  std::mt19937_64 rng(1);
  Matrix m = random_orthogonal(8, 3) + 0.01 * testutil::random_matrix(8, 8, rng);
  const double before = orthogonality_residual(m);
  for (int t = 0; t < 50; ++t) m = orthogonalize_update(m, 0.1);
  EXPECT_LT(orthogonality_residual(m), before * 0.1);
  EXPECT_THROW(orthogonalize_update(Matrix::Zero(2, 3), 0.1), ShapeError);
}

TEST(OrthogonalityResidual, KnownValues) {
  Matrix m = Matrix::Identity(3, 3);
  EXPECT_EQ(orthogonality_residual(m), 0.0);
  m(0, 0) = 2.0;
  EXPECT_DOUBLE_EQ(orthogonality_residual(m), 3.0);
  EXPECT_DOUBLE_EQ(orthogonality_residual_fro(m), 3.0);
}

TEST(RandomOrthogonal, DeterministicAndOrthogonal) {
  EXPECT_EQ(random_orthogonal(5, 9), random_orthogonal(5, 9));
  EXPECT_NE(random_orthogonal(5, 9), random_orthogonal(5, 10));
  EXPECT_THROW(random_orthogonal(0, 1), ArgumentError);
}

TEST(TangentProject, IsTangent) {
  std::mt19937_64 rng(2);
  const Matrix q = random_orthogonal(6, 4);
  const Matrix t = tangent_project(q, testutil::random_matrix(6, 6, rng));
  // q^T t must be skew-symmetric
  const Matrix s = q.transpose() * t;
  EXPECT_LT((s + s.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossEntropy, ValuesAndClamp) {
  const auto ce = cross_entropy(1.0, 0.5);
  EXPECT_NEAR(ce.loss, std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(ce.dlogit, -0.5);
  EXPECT_TRUE(std::isfinite(cross_entropy(1.0, 0.0).loss));
  EXPECT_NEAR(cross_entropy(1.0, 0.0).loss, -std::log(kProbabilityEpsilon), 1e-9);
}

TEST(CrossEntropy, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const double y = u(rng);
    const double z = g(rng);
    auto f = [&](const std::vector<double>& v) { return cross_entropy(y, sigmoid(v[0])).loss; };
    const double fd = oracle::central_difference(f, {z}, 0);
    EXPECT_LT(oracle::relative_error(cross_entropy(y, sigmoid(z)).dlogit, fd), 1e-4);
  }
}

TEST(MseLoss, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testutil::random_matrix(3, 4, rng);
    const Matrix b = testutil::random_matrix(3, 4, rng);
    const auto m = mse_loss(a, b);
    std::vector<double> fa, fb, ga, gb;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      auto fa_fn = [&](const std::vector<double>& v) {
        Matrix x = a;
        x.data()[i] = v[0];
        return mse_loss(x, b).loss;
      };
      auto fb_fn = [&](const std::vector<double>& v) {
        Matrix x = b;
        x.data()[i] = v[0];
        return mse_loss(a, x).loss;
      };
      fa.push_back(oracle::central_difference(fa_fn, {a.data()[i]}, 0));
      fb.push_back(oracle::central_difference(fb_fn, {b.data()[i]}, 0));
      ga.push_back(m.grad_a.data()[i]);
      gb.push_back(m.grad_b.data()[i]);
    }
    EXPECT_LT(oracle::relative_error(ga, fa), 1e-4);
    EXPECT_LT(oracle::relative_error(gb, fb), 1e-4);
  }
  EXPECT_THROW(mse_loss(Matrix::Zero(1, 2), Matrix::Zero(2, 1)), ShapeError);
}

TEST(SgdState, DecayShrinkAndValidation) {
  SgdState s;
  s.lr = 1.0;
  s.decay = 0.5;
  s.shrink = 0.1;
  s.end_epoch();
  EXPECT_DOUBLE_EQ(s.lr, 0.5);
  s.on_validation_drop();
  EXPECT_DOUBLE_EQ(s.lr, 0.05);
  s.min_lr = 0.04;
  s.on_validation_drop();
  EXPECT_DOUBLE_EQ(s.lr, 0.04);
  s.lr = 0;
  EXPECT_THROW(s.validate(), ArgumentError);
}

TEST(SgdStep, UpdatesAndChecks) {
  Matrix t = Matrix::Ones(2, 2);
  sgd_step(t, Matrix::Ones(2, 2), 0.5);
  EXPECT_EQ(t, Matrix::Constant(2, 2, 0.5));
  EXPECT_THROW(sgd_step(t, Matrix::Ones(3, 2), 0.5), ShapeError);
  Vector v = Vector::Ones(2);
  EXPECT_THROW(sgd_step(v, Vector::Ones(3), 0.5), ShapeError);
}
