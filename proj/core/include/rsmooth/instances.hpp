#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "rsmooth/problem.hpp"

namespace rsmooth {

/// Contiguous row blocks [offsets[p], offsets[p+1]). Block sizes differ by at
/// most one; the first m mod P blocks carry the extra row.
struct BatchPartition {
  std::vector<Index> offsets;

  static BatchPartition balanced(Index rows, Index batches);
  Index count() const { return static_cast<Index>(offsets.size()) - 1; }
  Index begin(Index p) const { return offsets[p]; }
  Index size(Index p) const { return offsets[p + 1] - offsets[p]; }
};

/// Sparse PCA: min -tr(X^T B^T B X) + lambda ||X||_1 over St(n, r).
struct SpcaInstance {
  Matrix b;  ///< m x n, zero-mean unit-norm columns
  double lambda = 0.0;
  Index r = 0;
  std::uint64_t seed = 0;
};

/// Standard Gaussian B (column-major draw order from mt19937_64(seed)), columns
/// shifted to zero mean and then normalized.
SpcaInstance spca_generate(Index m, Index n, Index r, double lambda, std::uint64_t seed);

double spca_f_value(const SpcaInstance& inst, const Matrix& x);
/// -2 B^T B X.
Matrix spca_f_grad(const SpcaInstance& inst, const Matrix& x);
/// -2 (m / |block p|) B_p^T B_p X; averaging with weights |block p| / m gives spca_f_grad.
Matrix spca_f_grad_batch(const SpcaInstance& inst, const Matrix& x, Index p, Index batches);

/// f(X) = -tr(X^T B^T B X) with the Gram matrix cached and a fixed row partition.
class SpcaTerm final : public SmoothTerm {
 public:
  SpcaTerm(Matrix b, Index batches);

  Index dim() const override { return b_.cols(); }
  double value(const Matrix& x) const override;
  Matrix gradient(const Matrix& x) const override;
  double value_and_gradient(const Matrix& x, Matrix& grad) const override;
  Index batch_count() const override { return partition_.count(); }
  double batch_probability(Index p) const override;
  Matrix batch_gradient(const Matrix& x, Index p) const override;
  double gradient_lipschitz() const override { return 2.0 * gram_norm_; }
  /// -r ||B^T B||_2.
  double lower_bound(Index r) const override { return -static_cast<double>(r) * gram_norm_; }
  /// 4 * (sum of the r largest eigenvalues of sum_p pi_p D_p^2), D_p = C_p / pi_p - C.
  /// This is the exact supremum over St(n, r) (Ky Fan).
  double variance_bound(Index r) const override;

  const Matrix& gram() const { return gram_; }
  double gram_norm() const { return gram_norm_; }
  const BatchPartition& partition() const { return partition_; }

 private:
  Matrix b_;
  Matrix gram_;
  double gram_norm_;
  BatchPartition partition_;
  mutable std::once_flag variance_once_;
  mutable Eigen::VectorXd variance_eigs_;  // descending
};

/// Compressed modes: min tr(X^T H X) + lambda ||X||_1 over St(n, r).
struct CmInstance {
  Matrix h;  ///< n x n discretized -1/2 d^2/dx^2
  double lambda = 0.0;
  Index r = 0;
  double length = 50.0;
};

/// H = tridiag(-1, 2, -1) / (2 Delta^2) with Dirichlet boundary and
/// Delta = length / (n + 1). Throws DimensionError for n < 3.
Matrix cm_build_h(Index n, double length = 50.0);
CmInstance cm_generate(Index n, Index r, double lambda, double length = 50.0);

/// f(X) = tr(X^T H X) for symmetric positive semidefinite H.
class TraceQuadraticTerm final : public SmoothTerm {
 public:
  explicit TraceQuadraticTerm(Matrix h);

  Index dim() const override { return h_.rows(); }
  double value(const Matrix& x) const override;
  Matrix gradient(const Matrix& x) const override;
  double value_and_gradient(const Matrix& x, Matrix& grad) const override;
  double gradient_lipschitz() const override { return 2.0 * h_norm_; }
  double lower_bound(Index) const override { return 0.0; }

 private:
  Matrix h_;
  double h_norm_;
};

/// lambda ||.||_1 over `entries` coordinates, or the zero function when lambda == 0.
std::shared_ptr<const WeaklyConvexFn> make_sparsity_term(double lambda, Index entries);

SmoothedProblem make_spca_problem(const SpcaInstance& inst, Index batches);
SmoothedProblem make_cm_problem(const CmInstance& inst);

}  // namespace rsmooth
