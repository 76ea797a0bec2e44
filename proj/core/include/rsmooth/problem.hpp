#pragma once

#include <cstdint>
#include <memory>

#include "rsmooth/linear_map.hpp"
#include "rsmooth/manifold.hpp"
#include "rsmooth/prox.hpp"

namespace rsmooth {

/// The smooth part f(X) = E_xi f(X, xi). Finite-sum terms expose a partition
/// sampler: batch p is drawn with probability batch_probability(p) and
/// sum_p batch_probability(p) * batch_gradient(X, p) == gradient(X).
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;

  virtual Index dim() const = 0;
  virtual double value(const Matrix& x) const = 0;
  virtual Matrix gradient(const Matrix& x) const = 0;
  /// Value and gradient together; terms sharing work between the two override this.
  virtual double value_and_gradient(const Matrix& x, Matrix& grad) const {
    grad = gradient(x);
    return value(x);
  }

  virtual Index batch_count() const { return 1; }
  virtual double batch_probability(Index /*p*/) const { return 1.0; }
  virtual Matrix batch_gradient(const Matrix& x, Index /*p*/) const { return gradient(x); }

  /// Lipschitz constant of the Euclidean gradient.
  virtual double gradient_lipschitz() const = 0;
  /// A lower bound of f over St(dim, r).
  virtual double lower_bound(Index r) const = 0;
  /// sup over St(dim, r) of E_p ||batch_gradient - gradient||^2.
  virtual double variance_bound(Index /*r*/) const { return 0.0; }
};

/// Values the solvers need from a single evaluation of F_k at X.
struct SmoothedEval {
  double f = 0.0;
  double envelope = 0.0;  ///< h_mu(AX)
  double value = 0.0;     ///< F_k(X) = f(X) + h_mu(AX)
  Matrix ax;
  Matrix prox;            ///< prox_{mu h}(AX)
  double prox_residual = 0.0;
  Matrix smooth_grad;     ///< grad f
  Matrix euclidean_grad;  ///< grad f + A^T (AX - prox) / mu
};

/// f(x) + h(Ax) over St(n, r) together with its Moreau smoothing
/// F_k(x) = f(x) + h_{mu_k}(Ax). Immutable; evaluations are pure.
class SmoothedProblem {
 public:
  SmoothedProblem(std::shared_ptr<const SmoothTerm> f, std::shared_ptr<const WeaklyConvexFn> h,
                  LinearMap a, Index r);

  const SmoothTerm& f() const { return *f_; }
  const WeaklyConvexFn& h() const { return *h_; }
  const LinearMap& a() const { return a_; }
  Index n() const { return f_->dim(); }
  Index r() const { return r_; }
  Index batch_count() const { return f_->batch_count(); }

  /// phi(X) = f(X) + h(AX).
  double objective(const Matrix& x) const;
  double smoothed_value(const Matrix& x, double mu) const;
  SmoothedEval evaluate(const Matrix& x, double mu) const;

  Matrix euclidean_grad(const Matrix& x, double mu) const;
  TangentVector riemannian_grad(const StiefelPoint& x, double mu) const;
  /// P_T(grad f(x, p) + A^T (Ax - prox) / mu).
  TangentVector riemannian_grad_batch(const StiefelPoint& x, double mu, Index p) const;
  /// P_T(grad f(x) + A^T g) with g a subgradient of h at Ax.
  TangentVector riemannian_subgradient(const StiefelPoint& x) const;

  /// alpha^2 l_grad_f + alpha^2 ||A||^2 max(1/mu, rho / (1 - rho mu)) + 2 G beta,
  /// which equals alpha^2 l_grad_f + alpha^2 ||A||^2 / mu + 2 G beta when rho mu < 1/2.
  /// The envelope term is dropped when h is identically zero (l_h = 0).
  double smoothness_constant(double mu, double gradient_bound, double alpha, double beta) const;

  /// 2 * max ||grad F_mu(X)|| over `samples` random feasible points.
  double estimate_gradient_bound(double mu, Index samples = 100, std::uint64_t seed = 1) const;

  /// Lower bound of F_k over the manifold: inf f + inf h.
  double lower_bound() const { return f_->lower_bound(r_) + h_->lower_bound(); }
  double variance_bound() const { return f_->variance_bound(r_); }
  /// E_p ||grad f(x, p) - grad f(x)||^2 at a given point (exact enumeration).
  double batch_variance(const Matrix& x) const;

 private:
  void require_point(const Matrix& x) const;

  std::shared_ptr<const SmoothTerm> f_;
  std::shared_ptr<const WeaklyConvexFn> h_;
  LinearMap a_;
  Index r_;
};

}  // namespace rsmooth
