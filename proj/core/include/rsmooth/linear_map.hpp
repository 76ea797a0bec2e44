#pragma once

#include <optional>

#include "rsmooth/manifold.hpp"

namespace rsmooth {

/// Power iteration did not reach its tolerance; carries the last iterate.
class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, double last_estimate, Eigen::VectorXd last_vector)
      : Error(what), last_estimate_(last_estimate), last_vector_(std::move(last_vector)) {}

  double last_estimate() const { return last_estimate_; }
  const Eigen::VectorXd& last_vector() const { return last_vector_; }

 private:
  double last_estimate_;
  Eigen::VectorXd last_vector_;
};

struct PowerIterationOptions {
  double tol = 1e-8;  ///< relative change of the estimate between sweeps
  Index max_iters = 10'000;
  std::uint64_t seed = 0x5eed;
};

struct PowerIterationResult {
  double value = 0.0;
  Index iterations = 0;
  Eigen::VectorXd vector;  ///< right singular vector estimate
};

/// Spectral norm ||M||_2 by power iteration on M^T M.
PowerIterationResult spectral_norm(const Matrix& m, const PowerIterationOptions& opts = {});

/// A linear map A : R^n -> R^m acting column-wise on n x r matrices, i.e.
/// apply(X) = A X. Immutable; the operator norm and, for surjective maps, the
/// pseudo-inverse are computed once at construction.
class LinearMap {
 public:
  static LinearMap identity(Index dim);
  static LinearMap dense(Matrix a);

  bool is_identity() const { return !dense_; }
  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }

  Matrix apply(const Matrix& x) const;
  Matrix adjoint(const Matrix& y) const;

  /// Cached ||A||_2 (1 for the identity).
  double norm() const { return norm_; }
  /// Smallest singular value when A is surjective.
  std::optional<double> sigma_min() const { return sigma_min_; }
  bool surjective() const { return sigma_min_.has_value(); }
  const Matrix* dense_matrix() const { return dense_ ? &*dense_ : nullptr; }

  /// x - A^+ (A x - z): the nearest point to x whose image is z.
  /// Throws SurjectivityError for rank-deficient dense maps.
  Matrix correct_point(const Matrix& x, const Matrix& z) const;

  /// Same map with a replaced norm estimate (for sensitivity checks).
  LinearMap with_norm_estimate(double norm) const;

 private:
  LinearMap() = default;
  void require_input(const Matrix& x, const char* op) const;

  Index input_dim_ = 0;
  Index output_dim_ = 0;
  std::optional<Matrix> dense_;
  std::optional<Matrix> pinv_;
  double norm_ = 1.0;
  std::optional<double> sigma_min_;
};

/// op_norm(A): the cached spectral norm estimate.
inline double op_norm(const LinearMap& a) { return a.norm(); }

}  // namespace rsmooth
