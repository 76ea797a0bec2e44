#include "rsmooth/instances.hpp"

#include <cmath>
#include <random>
#include <string>

namespace rsmooth {

BatchPartition BatchPartition::balanced(Index rows, Index batches) {
  if (batches < 1 || batches > rows) {
    throw ParameterError("batch count must lie in [1, " + std::to_string(rows) + "]");
  }
  BatchPartition part;
  part.offsets.reserve(static_cast<std::size_t>(batches) + 1);
  const Index base = rows / batches;
  const Index extra = rows % batches;
  Index at = 0;
  part.offsets.push_back(at);
  for (Index p = 0; p < batches; ++p) {
    at += base + (p < extra ? 1 : 0);
    part.offsets.push_back(at);
  }
  return part;
}

SpcaInstance spca_generate(Index m, Index n, Index r, double lambda, std::uint64_t seed) {
  if (m < 1 || n < 1 || r < 1 || r > n) throw DimensionError("spca_generate: need m, n >= 1, 1 <= r <= n");
  if (!(lambda >= 0)) throw ParameterError("spca_generate: lambda must be nonnegative");
  std::mt19937_64 rng(seed);
  SpcaInstance inst;
  inst.b = gaussian_matrix(m, n, rng);
  inst.b.rowwise() -= inst.b.colwise().mean();
  for (Index j = 0; j < n; ++j) {
    const double nrm = inst.b.col(j).norm();
    if (nrm > 0) inst.b.col(j) /= nrm;
  }
  inst.lambda = lambda;
  inst.r = r;
  inst.seed = seed;
  return inst;
}

double spca_f_value(const SpcaInstance& inst, const Matrix& x) {
  if (x.rows() != inst.b.cols()) throw DimensionError("spca_f_value: shape mismatch");
  return -(inst.b * x).squaredNorm();
}

Matrix spca_f_grad(const SpcaInstance& inst, const Matrix& x) {
  if (x.rows() != inst.b.cols()) throw DimensionError("spca_f_grad: shape mismatch");
  return -2.0 * (inst.b.transpose() * (inst.b * x));
}

Matrix spca_f_grad_batch(const SpcaInstance& inst, const Matrix& x, Index p, Index batches) {
  if (x.rows() != inst.b.cols()) throw DimensionError("spca_f_grad_batch: shape mismatch");
  const BatchPartition part = BatchPartition::balanced(inst.b.rows(), batches);
  if (p < 0 || p >= batches) throw ParameterError("spca_f_grad_batch: batch index out of range");
  const auto block = inst.b.middleRows(part.begin(p), part.size(p));
  const double scale = static_cast<double>(inst.b.rows()) / static_cast<double>(part.size(p));
  return (-2.0 * scale) * (block.transpose() * (block * x));
}

SpcaTerm::SpcaTerm(Matrix b, Index batches)
    : b_(std::move(b)), partition_(BatchPartition::balanced(b_.rows(), batches)) {
  gram_ = b_.transpose() * b_;
  gram_norm_ = spectral_norm(gram_).value;
}

double SpcaTerm::value(const Matrix& x) const {
  if (x.rows() != dim()) throw DimensionError("SpcaTerm: shape mismatch");
  return -(x.transpose() * (gram_ * x)).trace();
}

Matrix SpcaTerm::gradient(const Matrix& x) const {
  if (x.rows() != dim()) throw DimensionError("SpcaTerm: shape mismatch");
  return -2.0 * (gram_ * x);
}

double SpcaTerm::value_and_gradient(const Matrix& x, Matrix& grad) const {
  if (x.rows() != dim()) throw DimensionError("SpcaTerm: shape mismatch");
  grad.noalias() = -2.0 * (gram_ * x);
  return 0.5 * x.cwiseProduct(grad).sum();
}

double SpcaTerm::batch_probability(Index p) const {
  return static_cast<double>(partition_.size(p)) / static_cast<double>(b_.rows());
}

Matrix SpcaTerm::batch_gradient(const Matrix& x, Index p) const {
  if (x.rows() != dim()) throw DimensionError("SpcaTerm: shape mismatch");
  const auto block = b_.middleRows(partition_.begin(p), partition_.size(p));
  return (-2.0 / batch_probability(p)) * (block.transpose() * (block * x));
}

double SpcaTerm::variance_bound(Index r) const {
  std::call_once(variance_once_, [this] {
    // sum_p pi_p D_p^2 = sum_p C_p^2 / pi_p - C^2, with C_p^2 = B_p^T (B_p B_p^T) B_p.
    Matrix acc = -(gram_ * gram_);
    for (Index p = 0; p < partition_.count(); ++p) {
      const auto block = b_.middleRows(partition_.begin(p), partition_.size(p));
      const Matrix inner = block * block.transpose();
      acc.noalias() += (1.0 / batch_probability(p)) * (block.transpose() * (inner * block));
    }
    acc = 0.5 * (acc + acc.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(acc, Eigen::EigenvaluesOnly);
    variance_eigs_ = eig.eigenvalues().reverse();
  });
  const Index k = std::min<Index>(r, variance_eigs_.size());
  return 4.0 * std::max(0.0, variance_eigs_.head(k).sum());
}

Matrix cm_build_h(Index n, double length) {
  if (n < 3) throw DimensionError("cm_build_h: need n >= 3");
  if (!(length > 0)) throw ParameterError("cm_build_h: domain length must be positive");
  const double delta = length / static_cast<double>(n + 1);
  const double c = 1.0 / (2.0 * delta * delta);
  Matrix h = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = 2.0 * c;
    if (i + 1 < n) {
      h(i, i + 1) = -c;
      h(i + 1, i) = -c;
    }
  }
  return h;
}

CmInstance cm_generate(Index n, Index r, double lambda, double length) {
  if (r < 1 || r > n) throw DimensionError("cm_generate: need 1 <= r <= n");
  if (!(lambda >= 0)) throw ParameterError("cm_generate: lambda must be nonnegative");
  CmInstance inst;
  inst.h = cm_build_h(n, length);
  inst.lambda = lambda;
  inst.r = r;
  inst.length = length;
  return inst;
}

TraceQuadraticTerm::TraceQuadraticTerm(Matrix h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols()) throw DimensionError("TraceQuadraticTerm: H must be square");
  h_norm_ = spectral_norm(h_).value;
}

double TraceQuadraticTerm::value(const Matrix& x) const {
  if (x.rows() != dim()) throw DimensionError("TraceQuadraticTerm: shape mismatch");
  return (x.transpose() * (h_ * x)).trace();
}

Matrix TraceQuadraticTerm::gradient(const Matrix& x) const {
  if (x.rows() != dim()) throw DimensionError("TraceQuadraticTerm: shape mismatch");
  return 2.0 * (h_ * x);
}

double TraceQuadraticTerm::value_and_gradient(const Matrix& x, Matrix& grad) const {
  if (x.rows() != dim()) throw DimensionError("TraceQuadraticTerm: shape mismatch");
  grad.noalias() = 2.0 * (h_ * x);
  return 0.5 * x.cwiseProduct(grad).sum();
}

std::shared_ptr<const WeaklyConvexFn> make_sparsity_term(double lambda, Index entries) {
  if (lambda == 0.0) return std::make_shared<ZeroFunction>();
  return std::make_shared<L1Norm>(lambda, entries);
}

SmoothedProblem make_spca_problem(const SpcaInstance& inst, Index batches) {
  const Index n = inst.b.cols();
  return SmoothedProblem(std::make_shared<SpcaTerm>(inst.b, batches),
                         make_sparsity_term(inst.lambda, n * inst.r), LinearMap::identity(n),
                         inst.r);
}

SmoothedProblem make_cm_problem(const CmInstance& inst) {
  const Index n = inst.h.rows();
  return SmoothedProblem(std::make_shared<TraceQuadraticTerm>(inst.h),
                         make_sparsity_term(inst.lambda, n * inst.r), LinearMap::identity(n),
                         inst.r);
}

}  // namespace rsmooth
