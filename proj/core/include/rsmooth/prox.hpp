#pragma once

#include <limits>
#include <string>

#include "rsmooth/manifold.hpp"

namespace rsmooth {

/// A proper, closed, rho-weakly convex and l_h-Lipschitz function h with a
/// closed-form proximal map.
class WeaklyConvexFn {
 public:
  virtual ~WeaklyConvexFn() = default;

  virtual double value(const Matrix& y) const = 0;
  /// argmin_z h(z) + ||z - y||^2 / (2 mu), for mu in (0, 1/rho).
  virtual Matrix prox(const Matrix& y, double mu) const = 0;
  /// One element of the (Clarke) subdifferential at y.
  virtual Matrix subgradient(const Matrix& y) const = 0;
  virtual double lipschitz() const = 0;
  virtual double weak_convexity() const = 0;
  /// inf_y h(y); every term shipped here is nonnegative.
  virtual double lower_bound() const { return 0.0; }
  virtual std::string name() const = 0;

  /// Supremum of valid smoothing parameters, 1/rho (infinity for convex h).
  double max_smoothing() const {
    const double rho = weak_convexity();
    return rho > 0 ? 1.0 / rho : std::numeric_limits<double>::infinity();
  }
};

/// h(Y) = lambda * sum |Y_ij|. Its Lipschitz constant in the Frobenius norm
/// over `entries` coordinates is lambda * sqrt(entries).
///
/// h is convex, hence rho-weakly convex for every rho >= 0. The reported
/// modulus is `declared_rho` (default 0); a positive value lets the theory
/// schedule mu_k = (2 rho)^-1 k^-p and the constants built on rho apply as-is.
class L1Norm final : public WeaklyConvexFn {
 public:
  L1Norm(double lambda, Index entries, double declared_rho = 0.0);

  double value(const Matrix& y) const override;
  Matrix prox(const Matrix& y, double mu) const override;
  /// sign(Y) entrywise, with 0 at 0.
  Matrix subgradient(const Matrix& y) const override;
  double lipschitz() const override { return lipschitz_; }
  double weak_convexity() const override { return declared_rho_; }
  std::string name() const override { return "l1"; }

  double lambda() const { return lambda_; }

 private:
  double lambda_;
  double lipschitz_;
  double declared_rho_;
};

/// h = 0. Used when the sparsity weight is zero.
class ZeroFunction final : public WeaklyConvexFn {
 public:
  double value(const Matrix&) const override { return 0.0; }
  Matrix prox(const Matrix& y, double) const override { return y; }
  Matrix subgradient(const Matrix& y) const override { return Matrix::Zero(y.rows(), y.cols()); }
  double lipschitz() const override { return 0.0; }
  double weak_convexity() const override { return 0.0; }
  std::string name() const override { return "zero"; }
};

/// h(Y) = lambda ||Y||_1 + (rho/2) ||Y||_F^2, declared rho-weakly convex.
///
/// The quadratic is not globally Lipschitz; the reported constant
/// lambda sqrt(entries) + rho * radius is valid on the Frobenius ball of the
/// given radius, which contains every feasible point when radius >= sqrt(r).
class ElasticNet final : public WeaklyConvexFn {
 public:
  ElasticNet(double lambda, double rho, Index entries, double radius);

  double value(const Matrix& y) const override;
  Matrix prox(const Matrix& y, double mu) const override;
  Matrix subgradient(const Matrix& y) const override;
  double lipschitz() const override { return lipschitz_; }
  double weak_convexity() const override { return rho_; }
  std::string name() const override { return "elastic-net"; }

 private:
  double lambda_;
  double rho_;
  double lipschitz_;
};

/// Entrywise soft-thresholding sign(y) max(|y| - mu*lambda, 0).
Matrix prox_l1(const Matrix& y, double mu, double lambda);

/// Throws ParameterError unless 0 < mu < 1/rho.
void validate_smoothing(const WeaklyConvexFn& h, double mu);

/// Everything the envelope needs from one prox evaluation.
struct MoreauEval {
  Matrix prox;
  double value = 0.0;  ///< h_mu(y)
  Matrix gradient;     ///< (y - prox) / mu
};

MoreauEval moreau(const WeaklyConvexFn& h, const Matrix& y, double mu);

/// h_mu(y) = h(prox) + ||prox - y||^2 / (2 mu).
double moreau_value(const WeaklyConvexFn& h, const Matrix& y, double mu);

/// grad h_mu(y) = (y - prox_{mu h}(y)) / mu.
Matrix moreau_grad(const WeaklyConvexFn& h, const Matrix& y, double mu);

/// Checks h_{mu2}(y) <= h_{mu1}(y) + (mu1 - mu2) / mu2 * mu1 * l_h^2 / 2 with
/// slack 1e-10. Requires 0 < mu2 <= mu1 < 1/rho (ParameterError otherwise).
bool check_envelope_ordering(const WeaklyConvexFn& h, const Matrix& y, double mu1, double mu2);

}  // namespace rsmooth
