#include "rsmooth/manifold.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "log.hpp"

namespace rsmooth {

namespace {

// Drift above this is reported; anything above kFeasibilityTol is repaired.
constexpr double kDriftWarnTol = 1e-8;

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Matrix thin_q_sign_fixed(const Matrix& m) {
  const Index n = m.rows();
  const Index r = m.cols();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  const Matrix& packed = qr.matrixQR();
  const double scale = std::max(1.0, packed.topLeftCorner(r, r).cwiseAbs().maxCoeff());
  for (Index j = 0; j < r; ++j) {
    const double d = packed(j, j);
    if (!(std::abs(d) > 1e-12 * scale)) {
      throw DegenerateStepError("QR retraction: X + eta is numerically rank deficient (|R_jj| = " +
                                std::to_string(std::abs(d)) + ")");
    }
    if (d < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

double check_feasible(const Matrix& x) {
  const Index r = x.cols();
  return (x.transpose() * x - Matrix::Identity(r, r)).norm();
}

Matrix polar_factor(const Matrix& m) {
  if (m.cols() == 0 || m.rows() < m.cols()) {
    throw DimensionError("polar_factor: expected a tall matrix, got " + shape(m));
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-14 * std::max(s(0), 1e-300))) {
    throw DegenerateStepError("polar_factor: matrix is numerically rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

StiefelPoint::StiefelPoint(Matrix data) {
  if (data.cols() < 1 || data.rows() < data.cols()) {
    throw DimensionError("StiefelPoint: need n >= r >= 1, got " + shape(data));
  }
  const double res = check_feasible(data);
  if (!(res <= kFeasibilityTol)) {
    throw FeasibilityError("StiefelPoint: ||X^T X - I||_F = " + std::to_string(res) +
                           " exceeds tolerance");
  }
  data_ = std::make_shared<const Matrix>(std::move(data));
}

StiefelPoint::StiefelPoint(Matrix data, Trusted)
    : data_(std::make_shared<const Matrix>(std::move(data))) {}

StiefelPoint StiefelPoint::orthonormalize(const Matrix& m) {
  return StiefelPoint(polar_factor(m));
}

StiefelPoint StiefelPoint::identity_columns(Index n, Index r) {
  if (r < 1 || n < r) throw DimensionError("identity_columns: need n >= r >= 1");
  return StiefelPoint(Matrix::Identity(n, r), Trusted{});
}

StiefelPoint StiefelPoint::random(Index n, Index r, std::mt19937_64& rng) {
  if (r < 1 || n < r) throw DimensionError("random point: need n >= r >= 1");
  return orthonormalize(gaussian_matrix(n, r, rng));
}

double tangent_residual(const StiefelPoint& x, const Matrix& eta) {
  const Matrix s = x.matrix().transpose() * eta;
  return (s + s.transpose()).norm();
}

TangentVector TangentVector::checked(const StiefelPoint& base, Matrix data) {
  if (data.rows() != base.rows() || data.cols() != base.cols()) {
    throw DimensionError("tangent vector shape " + shape(data) + " does not match base point " +
                         shape(base.matrix()));
  }
  const double res = tangent_residual(base, data);
  if (!(res <= kTangentTol * std::max(1.0, data.norm()))) {
    throw FeasibilityError("tangent vector: ||X^T eta + eta^T X||_F = " + std::to_string(res));
  }
  return TangentVector(base, std::move(data));
}

TangentVector TangentVector::zero(const StiefelPoint& base) {
  return TangentVector(base, Matrix::Zero(base.rows(), base.cols()));
}

TangentVector TangentVector::scaled(double t) const { return TangentVector(base_, t * data_); }

TangentVector project_tangent(const StiefelPoint& x, const Matrix& u) {
  if (u.rows() != x.rows() || u.cols() != x.cols()) {
    throw DimensionError("project_tangent: U is " + shape(u) + ", X is " + shape(x.matrix()));
  }
  const Matrix xtu = x.matrix().transpose() * u;
  Matrix p = u - x.matrix() * (0.5 * (xtu + xtu.transpose()));
  return TangentVector(x, std::move(p));
}

StiefelPoint retract(const StiefelPoint& x, const TangentVector& eta, RetractionKind kind) {
  const Matrix& d = eta.matrix();
  if (d.rows() != x.rows() || d.cols() != x.cols()) {
    throw DimensionError("retract: eta is " + shape(d) + ", X is " + shape(x.matrix()));
  }
  if (!eta.base().shares_storage(x)) {
    const double res = tangent_residual(x, d);
    if (!(res <= TangentVector::kTangentTol * std::max(1.0, d.norm()))) {
      throw FeasibilityError("retract: eta is not tangent at X (residual " + std::to_string(res) +
                             ")");
    }
  }
  if (d.isZero(0.0)) return x;

  const Matrix y = x.matrix() + d;
  Matrix q = kind == RetractionKind::Polar ? polar_factor(y) : thin_q_sign_fixed(y);
  const double drift = check_feasible(q);
  if (drift > StiefelPoint::kFeasibilityTol) {
    if (drift > kDriftWarnTol) {
      detail::warn("feasibility drift " + std::to_string(drift) +
                   " after retraction; re-orthonormalizing");
    }
    q = polar_factor(q);
  }
  return StiefelPoint(std::move(q));
}

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

TangentVector random_unit_tangent(const StiefelPoint& x, std::mt19937_64& rng) {
  for (;;) {
    TangentVector t = project_tangent(x, gaussian_matrix(x.rows(), x.cols(), rng));
    const double nrm = t.norm();
    if (nrm > 1e-12) return t.scaled(1.0 / nrm);
  }
}

}  // namespace rsmooth
