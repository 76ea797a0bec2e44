#include "rsmooth/linear_map.hpp"

#include <cmath>
#include <random>
#include <string>

namespace rsmooth {

namespace {

// Singular values below kRankCut * sigma_max are dropped from the pseudo-inverse;
// surjectivity needs the smallest retained one above kSurjectiveCut * sigma_max.
constexpr double kRankCut = 1e-12;
constexpr double kSurjectiveCut = 1e-10;

}  // namespace

PowerIterationResult spectral_norm(const Matrix& m, const PowerIterationOptions& opts) {
  PowerIterationResult out;
  const Index n = m.cols();
  if (n == 0 || m.rows() == 0) return out;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  v.normalize();

  double prev = 0.0;
  for (Index it = 1; it <= opts.max_iters; ++it) {
    const Eigen::VectorXd mv = m * v;
    Eigen::VectorXd w = m.transpose() * mv;
    const double est = std::sqrt(std::max(0.0, v.dot(w)));  // sqrt of Rayleigh quotient of M^T M
    const double wn = w.norm();
    out.value = est;
    out.iterations = it;
    if (wn == 0.0) {  // v in the null space: M = 0 or an unlucky start
      if (m.isZero(0.0)) {
        out.value = 0.0;
        out.vector = v;
        return out;
      }
      v = Eigen::VectorXd::Ones(n).normalized();
      continue;
    }
    v = w / wn;
    if (it > 1 && std::abs(est - prev) <= opts.tol * std::max(est, 1e-300)) {
      out.vector = v;
      return out;
    }
    prev = est;
  }
  throw EstimationError("spectral_norm: power iteration did not converge in " +
                            std::to_string(opts.max_iters) + " iterations",
                        out.value, v);
}

LinearMap LinearMap::identity(Index dim) {
  if (dim < 1) throw DimensionError("identity map: dimension must be positive");
  LinearMap a;
  a.input_dim_ = dim;
  a.output_dim_ = dim;
  a.norm_ = 1.0;
  a.sigma_min_ = 1.0;
  return a;
}

LinearMap LinearMap::dense(Matrix m) {
  if (m.rows() < 1 || m.cols() < 1) throw DimensionError("dense map: empty matrix");
  LinearMap a;
  a.input_dim_ = m.cols();
  a.output_dim_ = m.rows();
  a.norm_ = spectral_norm(m).value;

  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > kRankCut * smax) {
      inv(i) = 1.0 / s(i);
      ++rank;
    }
  }
  a.pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  if (rank == m.rows() && smax > 0 && s(rank - 1) > kSurjectiveCut * smax) {
    a.sigma_min_ = s(rank - 1);
  }
  a.dense_ = std::move(m);
  return a;
}

void LinearMap::require_input(const Matrix& x, const char* op) const {
  if (x.rows() != input_dim_) {
    throw DimensionError(std::string(op) + ": operand has " + std::to_string(x.rows()) +
                         " rows, map expects " + std::to_string(input_dim_));
  }
}

Matrix LinearMap::apply(const Matrix& x) const {
  require_input(x, "apply");
  if (!dense_) return x;
  return *dense_ * x;
}

Matrix LinearMap::adjoint(const Matrix& y) const {
  if (y.rows() != output_dim_) {
    throw DimensionError("adjoint: operand has " + std::to_string(y.rows()) +
                         " rows, map output dimension is " + std::to_string(output_dim_));
  }
  if (!dense_) return y;
  return dense_->transpose() * y;
}

Matrix LinearMap::correct_point(const Matrix& x, const Matrix& z) const {
  require_input(x, "correct_point");
  if (z.rows() != output_dim_ || z.cols() != x.cols()) {
    throw DimensionError("correct_point: target has the wrong shape");
  }
  if (!dense_) return z;
  if (!surjective()) throw SurjectivityError("correct_point: dense map is not surjective");
  return x - *pinv_ * (*dense_ * x - z);
}

LinearMap LinearMap::with_norm_estimate(double norm) const {
  if (!(norm > 0)) throw ParameterError("norm estimate must be positive");
  LinearMap copy = *this;
  copy.norm_ = norm;
  return copy;
}

}  // namespace rsmooth
