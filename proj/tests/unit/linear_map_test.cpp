#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "rsmooth/linear_map.hpp"

namespace rsmooth {
namespace {

TEST(LinearMap, IdentityIsBitwisePassThrough) {
  std::mt19937_64 rng(1);
  const Matrix x = gaussian_matrix(6, 2, rng);
  const LinearMap a = LinearMap::identity(6);
  EXPECT_EQ(a.apply(x), x);
  EXPECT_EQ(a.adjoint(x), x);
  EXPECT_EQ(a.correct_point(x, 2 * x), 2 * x);
  EXPECT_EQ(a.norm(), 1.0);
  EXPECT_TRUE(a.surjective());
}

TEST(LinearMap, DenseApply) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const Matrix y = LinearMap::dense(m).apply(Matrix::Ones(2, 1));
  EXPECT_EQ(y(0), 3.0);
  EXPECT_EQ(y(1), 7.0);
}

TEST(LinearMap, ShapeMismatchThrows) {
  EXPECT_THROW(LinearMap::identity(3).apply(Matrix::Zero(4, 1)), DimensionError);
  EXPECT_THROW(LinearMap::dense(Matrix::Ones(2, 3)).adjoint(Matrix::Zero(3, 1)), DimensionError);
}

TEST(LinearMap, AdjointConsistency) {
  std::mt19937_64 rng(2);
  const LinearMap a = LinearMap::dense(gaussian_matrix(5, 8, rng));
  for (int t = 0; t < 100; ++t) {
    const Matrix x = gaussian_matrix(8, 3, rng), y = gaussian_matrix(5, 3, rng);
    EXPECT_NEAR(a.apply(x).cwiseProduct(y).sum(), x.cwiseProduct(a.adjoint(y)).sum(), 1e-10);
  }
}

TEST(SpectralNorm, DiagonalAndSvdOracle) {
  EXPECT_NEAR(LinearMap::dense(Eigen::Vector2d(3, 1).asDiagonal().toDenseMatrix()).norm(), 3.0,
              3e-8);
  std::mt19937_64 rng(3);
  const Matrix m = gaussian_matrix(20, 10, rng);
  const double truth = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  EXPECT_NEAR(spectral_norm(m).value / truth, 1.0, 1e-6);
}

TEST(SpectralNorm, IterationCapRaises) {
  std::mt19937_64 rng(4);
  PowerIterationOptions opts;
  opts.max_iters = 1;
  opts.tol = 1e-300;
  EXPECT_THROW(spectral_norm(gaussian_matrix(30, 30, rng), opts), EstimationError);
}

TEST(CorrectPoint, SquareInvertible) {
  Matrix m(2, 2);
  m << 1, 0, 0, 2;
  const Matrix xh = LinearMap::dense(m).correct_point(Matrix::Ones(2, 1), Matrix::Ones(2, 1));
  EXPECT_NEAR(xh(0), 1.0, 1e-14);
  EXPECT_NEAR(xh(1), 0.5, 1e-14);
}

TEST(CorrectPoint, ReproducesTargetAndRespectsBound) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const LinearMap a = LinearMap::dense(gaussian_matrix(4, 7, rng));
    ASSERT_TRUE(a.surjective());
    const Matrix x = gaussian_matrix(7, 2, rng), z = gaussian_matrix(4, 2, rng);
    const Matrix xh = a.correct_point(x, z);
    EXPECT_LE((a.apply(xh) - z).norm(), 1e-8 * z.norm());
    EXPECT_LE((x - xh).norm(), (a.apply(x) - z).norm() / *a.sigma_min() * (1 + 1e-10));
  }
}

TEST(CorrectPoint, RankDeficientThrows) {
  Matrix m(2, 3);
  m << 1, 2, 3, 2, 4, 6;
  const LinearMap a = LinearMap::dense(m);
  EXPECT_FALSE(a.surjective());
  EXPECT_THROW(a.correct_point(Matrix::Ones(3, 1), Matrix::Ones(2, 1)), SurjectivityError);
}

}  // namespace
}  // namespace rsmooth
