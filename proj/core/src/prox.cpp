#include "rsmooth/prox.hpp"

#include <cmath>
#include <string>

namespace rsmooth {

namespace {

constexpr double kOrderingSlack = 1e-10;

double soft(double y, double t) {
  const double a = std::abs(y) - t;
  return a > 0 ? std::copysign(a, y) : 0.0;
}

Matrix sign_with_zero(const Matrix& y) {
  return y.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

}  // namespace

Matrix prox_l1(const Matrix& y, double mu, double lambda) {
  const double t = mu * lambda;
  return y.unaryExpr([t](double v) { return soft(v, t); });
}

L1Norm::L1Norm(double lambda, Index entries, double declared_rho)
    : lambda_(lambda),
      lipschitz_(lambda * std::sqrt(static_cast<double>(entries))),
      declared_rho_(declared_rho) {
  if (!(lambda > 0)) throw ParameterError("L1Norm: lambda must be positive");
  if (entries < 1) throw ParameterError("L1Norm: entries must be positive");
  if (!(declared_rho >= 0) || !std::isfinite(declared_rho)) {
    throw ParameterError("L1Norm: declared rho must be finite and nonnegative");
  }
}

double L1Norm::value(const Matrix& y) const { return lambda_ * y.cwiseAbs().sum(); }

Matrix L1Norm::prox(const Matrix& y, double mu) const { return prox_l1(y, mu, lambda_); }

Matrix L1Norm::subgradient(const Matrix& y) const { return lambda_ * sign_with_zero(y); }

ElasticNet::ElasticNet(double lambda, double rho, Index entries, double radius)
    : lambda_(lambda), rho_(rho) {
  if (!(lambda >= 0)) throw ParameterError("ElasticNet: lambda must be nonnegative");
  if (!(rho > 0)) throw ParameterError("ElasticNet: rho must be positive");
  if (!(radius > 0)) throw ParameterError("ElasticNet: radius must be positive");
  lipschitz_ = lambda * std::sqrt(static_cast<double>(entries)) + rho * radius;
}

double ElasticNet::value(const Matrix& y) const {
  return lambda_ * y.cwiseAbs().sum() + 0.5 * rho_ * y.squaredNorm();
}

Matrix ElasticNet::prox(const Matrix& y, double mu) const {
  // Stationarity: lambda s + rho z + (z - y)/mu = 0  =>  z = soft(y, mu lambda) / (1 + rho mu).
  return prox_l1(y, mu, lambda_) / (1.0 + rho_ * mu);
}

Matrix ElasticNet::subgradient(const Matrix& y) const {
  return lambda_ * sign_with_zero(y) + rho_ * y;
}

void validate_smoothing(const WeaklyConvexFn& h, double mu) {
  if (!(mu > 0) || !(mu < h.max_smoothing())) {
    throw ParameterError("smoothing parameter mu = " + std::to_string(mu) +
                         " outside (0, 1/rho) for " + h.name());
  }
}

MoreauEval moreau(const WeaklyConvexFn& h, const Matrix& y, double mu) {
  validate_smoothing(h, mu);
  MoreauEval out;
  out.prox = h.prox(y, mu);
  const Matrix diff = y - out.prox;
  out.value = h.value(out.prox) + diff.squaredNorm() / (2.0 * mu);
  out.gradient = diff / mu;
  return out;
}

double moreau_value(const WeaklyConvexFn& h, const Matrix& y, double mu) {
  return moreau(h, y, mu).value;
}

Matrix moreau_grad(const WeaklyConvexFn& h, const Matrix& y, double mu) {
  validate_smoothing(h, mu);
  return (y - h.prox(y, mu)) / mu;
}

bool check_envelope_ordering(const WeaklyConvexFn& h, const Matrix& y, double mu1, double mu2) {
  if (!(mu2 > 0) || !(mu2 <= mu1) || !(mu1 < h.max_smoothing())) {
    throw ParameterError("envelope ordering requires 0 < mu2 <= mu1 < 1/rho");
  }
  const double lh = h.lipschitz();
  const double lhs = moreau_value(h, y, mu2);
  const double rhs = moreau_value(h, y, mu1) + 0.5 * (mu1 - mu2) / mu2 * mu1 * lh * lh;
  return lhs <= rhs + kOrderingSlack;
}

}  // namespace rsmooth
