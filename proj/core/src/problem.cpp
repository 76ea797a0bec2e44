#include "rsmooth/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rsmooth {

SmoothedProblem::SmoothedProblem(std::shared_ptr<const SmoothTerm> f,
                                 std::shared_ptr<const WeaklyConvexFn> h, LinearMap a, Index r)
    : f_(std::move(f)), h_(std::move(h)), a_(std::move(a)), r_(r) {
  if (!f_ || !h_) throw ParameterError("SmoothedProblem: f and h are required");
  if (r_ < 1 || f_->dim() < r_) throw DimensionError("SmoothedProblem: need n >= r >= 1");
  if (a_.input_dim() != f_->dim()) {
    throw DimensionError("SmoothedProblem: A has input dimension " +
                         std::to_string(a_.input_dim()) + ", f has " + std::to_string(f_->dim()));
  }
}

void SmoothedProblem::require_point(const Matrix& x) const {
  if (x.rows() != n() || x.cols() != r_) {
    throw DimensionError("point has shape " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", problem expects " + std::to_string(n()) +
                         "x" + std::to_string(r_));
  }
}

double SmoothedProblem::objective(const Matrix& x) const {
  require_point(x);
  return f_->value(x) + h_->value(a_.apply(x));
}

double SmoothedProblem::smoothed_value(const Matrix& x, double mu) const {
  require_point(x);
  return f_->value(x) + moreau_value(*h_, a_.apply(x), mu);
}

SmoothedEval SmoothedProblem::evaluate(const Matrix& x, double mu) const {
  require_point(x);
  SmoothedEval e;
  e.f = f_->value_and_gradient(x, e.smooth_grad);
  e.ax = a_.apply(x);
  MoreauEval env = moreau(*h_, e.ax, mu);
  e.envelope = env.value;
  e.value = e.f + e.envelope;
  e.prox = std::move(env.prox);
  e.prox_residual = (e.ax - e.prox).norm();
  e.euclidean_grad = e.smooth_grad + a_.adjoint(env.gradient);
  return e;
}

Matrix SmoothedProblem::euclidean_grad(const Matrix& x, double mu) const {
  require_point(x);
  return f_->gradient(x) + a_.adjoint(moreau_grad(*h_, a_.apply(x), mu));
}

TangentVector SmoothedProblem::riemannian_grad(const StiefelPoint& x, double mu) const {
  return project_tangent(x, euclidean_grad(x.matrix(), mu));
}

TangentVector SmoothedProblem::riemannian_grad_batch(const StiefelPoint& x, double mu,
                                                     Index p) const {
  require_point(x.matrix());
  if (p < 0 || p >= batch_count()) throw ParameterError("batch index out of range");
  const Matrix g = f_->batch_gradient(x.matrix(), p) +
                   a_.adjoint(moreau_grad(*h_, a_.apply(x.matrix()), mu));
  return project_tangent(x, g);
}

TangentVector SmoothedProblem::riemannian_subgradient(const StiefelPoint& x) const {
  require_point(x.matrix());
  const Matrix g = f_->gradient(x.matrix()) + a_.adjoint(h_->subgradient(a_.apply(x.matrix())));
  return project_tangent(x, g);
}

double SmoothedProblem::smoothness_constant(double mu, double gradient_bound, double alpha,
                                            double beta) const {
  if (!(mu > 0) || !(alpha > 0) || !(beta >= 0) || !(gradient_bound >= 0)) {
    throw ParameterError("smoothness_constant: need mu > 0, alpha > 0, beta >= 0, G >= 0");
  }
  const double rho = h_->weak_convexity();
  if (rho > 0 && !(rho * mu < 1.0)) {
    throw ParameterError("smoothness_constant: mu must be below 1/rho");
  }
  const double lf = f_->gradient_lipschitz();
  const double an = a_.norm();
  // grad h_mu is (1/mu)-Lipschitz (max(1/mu, rho/(1 - rho mu)) for weakly convex h),
  // and identically zero when h is.
  double env = rho > 0 ? std::max(1.0 / mu, rho / (1.0 - rho * mu)) : 1.0 / mu;
  if (h_->lipschitz() == 0.0) env = 0.0;
  return alpha * alpha * lf + alpha * alpha * an * an * env + 2.0 * gradient_bound * beta;
}

double SmoothedProblem::estimate_gradient_bound(double mu, Index samples,
                                                std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (Index s = 0; s < samples; ++s) {
    const StiefelPoint x = StiefelPoint::random(n(), r_, rng);
    best = std::max(best, euclidean_grad(x.matrix(), mu).norm());
  }
  return 2.0 * best;
}

double SmoothedProblem::batch_variance(const Matrix& x) const {
  require_point(x);
  const Matrix g = f_->gradient(x);
  double var = 0.0;
  for (Index p = 0; p < batch_count(); ++p) {
    var += f_->batch_probability(p) * (f_->batch_gradient(x, p) - g).squaredNorm();
  }
  return var;
}

}  // namespace rsmooth
