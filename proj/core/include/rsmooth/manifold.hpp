#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>

#include "rsmooth/errors.hpp"

namespace rsmooth {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class RetractionKind { Polar, QR };

/// Residual ||X^T X - I_r||_F.
double check_feasible(const Matrix& x);

/// Orthonormal polar factor U V^T of a full-column-rank matrix.
/// Throws DegenerateStepError when the matrix is numerically rank deficient.
Matrix polar_factor(const Matrix& m);

/// A point on the Stiefel manifold St(n, r). The matrix is shared and never
/// mutated, so copies are cheap and safe to hand to other threads.
class StiefelPoint {
 public:
  static constexpr double kFeasibilityTol = 1e-10;

  /// Wraps an already orthonormal matrix; throws FeasibilityError otherwise.
  explicit StiefelPoint(Matrix data);

  /// Polar factor of an arbitrary full-column-rank matrix.
  static StiefelPoint orthonormalize(const Matrix& m);
  /// First r columns of I_n.
  static StiefelPoint identity_columns(Index n, Index r);
  /// Polar factor of a standard Gaussian n x r matrix.
  static StiefelPoint random(Index n, Index r, std::mt19937_64& rng);

  const Matrix& matrix() const { return *data_; }
  Index rows() const { return data_->rows(); }
  Index cols() const { return data_->cols(); }
  bool shares_storage(const StiefelPoint& other) const { return data_ == other.data_; }

 private:
  struct Trusted {};
  StiefelPoint(Matrix data, Trusted);

  std::shared_ptr<const Matrix> data_;
};

/// An element of T_X St(n, r), i.e. X^T eta + eta^T X = 0.
class TangentVector {
 public:
  /// Relative tolerance on ||X^T eta + eta^T X||_F / max(1, ||eta||_F).
  static constexpr double kTangentTol = 1e-10;

  /// Validates membership; throws DimensionError or FeasibilityError.
  static TangentVector checked(const StiefelPoint& base, Matrix data);
  static TangentVector zero(const StiefelPoint& base);

  const Matrix& matrix() const { return data_; }
  const StiefelPoint& base() const { return base_; }
  double norm() const { return data_.norm(); }
  TangentVector scaled(double t) const;

 private:
  friend TangentVector project_tangent(const StiefelPoint& x, const Matrix& u);
  TangentVector(StiefelPoint base, Matrix data) : base_(std::move(base)), data_(std::move(data)) {}

  StiefelPoint base_;
  Matrix data_;
};

/// ||X^T eta + eta^T X||_F.
double tangent_residual(const StiefelPoint& x, const Matrix& eta);

/// P_X(U) = U - X (U^T X + X^T U) / 2.
TangentVector project_tangent(const StiefelPoint& x, const Matrix& u);

/// R_X(eta). Polar uses the thin SVD of X + eta; QR uses a thin Householder QR
/// with the diagonal of R forced positive. Results with feasibility drift above
/// kFeasibilityTol are re-orthonormalized through the polar factor.
StiefelPoint retract(const StiefelPoint& x, const TangentVector& eta,
                     RetractionKind kind = RetractionKind::Polar);

/// Standard Gaussian tangent vector at x, normalized to unit Frobenius norm.
TangentVector random_unit_tangent(const StiefelPoint& x, std::mt19937_64& rng);

/// Matrix of i.i.d. standard normal entries.
Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace rsmooth
