#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "rsmooth/problem.hpp"
#include "rsmooth/run_record.hpp"

namespace rsmooth {

enum class Algorithm { Rsg, RsgEpochs, Rssg, RssgEpochs, Rsub };
enum class StepMode { Theory, Practical };

std::string_view to_string(Algorithm algo);
std::string_view to_string(StepMode mode);
/// Accepts "rsg", "rsg-epochs", "rssg", "rssg-epochs", "rsub".
Algorithm parse_algorithm(std::string_view name);
/// Accepts "theory" and "practical".
StepMode parse_step_mode(std::string_view name);
bool is_stochastic(Algorithm algo);

/// A non-finite value appeared; the trace up to that point is attached.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, RunRecord partial)
      : Error(what), partial_(std::move(partial)) {}
  const RunRecord& partial() const { return partial_; }

 private:
  RunRecord partial_;
};

/// F_k(x^{k+1}) exceeded the descent bound while descent was enforced.
class DescentViolation : public Error {
 public:
  using Error::Error;
};

/// Smoothing and stepsize schedule.
///
/// mu_k = mu0 * k^(-1/3) for the deterministic methods and mu0 * k^(-1/5) for
/// the stochastic ones. Theory mode uses gamma_k = 1/l_k (deterministic) and
/// gamma_k = omega / l_k^3 (stochastic); Practical mode uses c * k^(-1/3) and
/// c * k^(-3/5), with c calibrated by one backtracking pass at k = 1 unless given.
struct ScheduleConfig {
  /// Default mu0 when h is convex (rho = 0) and none is supplied.
  static constexpr double kConvexDefaultMu0 = 0.05;

  std::optional<double> mu0;  ///< default (2 rho)^-1 when rho > 0
  StepMode step_mode = StepMode::Practical;
  std::optional<double> step_scale;  ///< Practical-mode c
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> gradient_bound;  ///< G; estimated at mu_1 when absent
  std::optional<double> lower_bound;     ///< F*; problem lower bound when absent
  std::optional<double> sigma_sq;        ///< variance bound; problem bound when absent
  RetractionKind retraction = RetractionKind::Polar;
  bool check_descent = true;             ///< deterministic methods only
  std::optional<bool> enforce_descent;   ///< throw on violation; default: Theory mode
};

struct StopRule {
  static constexpr double kReferenceSlack = 1e-10;

  double tol = 1e-8;
  Index max_iters = 1000;  ///< number of update steps
  std::optional<double> reference_objective;

  /// tol = 1e-8 n r; 1000 steps for the smoothing methods, 10000 for rsub.
  static StopRule defaults(const SmoothedProblem& problem, Algorithm algo);
};

/// Constants resolved once per run.
struct ResolvedSchedule {
  StepMode mode = StepMode::Practical;
  double mu0 = 0.0;
  double exponent = 1.0 / 3.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gradient_bound = 0.0;
  /// Practical c, or omega for theory-mode stochastic stepsizes.
  double step_scale = 0.0;
  bool stochastic = false;

  double mu(Index k) const;
  double ell(const SmoothedProblem& problem, Index k) const;
  double gamma(Index k, double ell_k) const;
};

ResolvedSchedule resolve_schedule(const SmoothedProblem& problem, const StiefelPoint& x1,
                                  const ScheduleConfig& cfg, bool stochastic);

struct TheoryConstants {
  double omega1 = 0.0;
  double omega2 = 0.0;
  std::optional<double> omega3;  ///< needs a surjective A
  double omega4 = 0.0;
  double omega = 0.0;  ///< 2 omega4^3 / omega1
};

/// Throws ConfigurationError when rho = 0 (use Practical mode instead).
TheoryConstants theory_constants(const SmoothedProblem& problem, const StiefelPoint& x1,
                                 const ScheduleConfig& cfg);

/// 2 sqrt(omega1 omega2) / K^(1/3): bound on min_{k <= K} ||grad F_k(x^k)||.
double deterministic_rate_bound(const TheoryConstants& tc, Index k);
/// 2 max{8 sqrt(omega1^3 omega2^3), (2 rho)^-3 l_h^3} eps^-3.
double epoch_iteration_budget(const TheoryConstants& tc, double rho, double lipschitz_h,
                              double epsilon);
/// (omega2 omega1^4 omega4^-3 + 2 sigma^2 omega1^2 omega4^-2 ln(3K)) K^(-2/5).
double stochastic_rate_bound(const TheoryConstants& tc, double sigma_sq, Index k);

struct StationarityResiduals {
  double grad_norm = 0.0;
  double prox_residual = 0.0;
  std::optional<double> corrected_residual;  ///< ||x - x_hat|| when A is surjective
};

StationarityResiduals stationarity_residuals(const SmoothedProblem& problem,
                                             const StiefelPoint& x, double mu);

/// Draws one index with probability proportional to its weight from a stream
/// of (index, weight) offers, using a single slot (weighted reservoir).
class OutputSampler {
 public:
  /// Throws ConfigurationError for weights that are not strictly positive.
  /// Returns true when the offered index becomes the current selection.
  bool offer(Index k, double weight, std::mt19937_64& rng);
  std::optional<Index> selected() const { return selected_; }
  double total_weight() const { return total_; }

 private:
  double total_ = 0.0;
  std::optional<Index> selected_;
};

/// Deterministic smoothing gradient method.
RunRecord solve_rsg(const SmoothedProblem& problem, const StiefelPoint& x1,
                    const ScheduleConfig& cfg, const StopRule& stop);

struct EpochOptions {
  double epsilon = 1e-3;
  /// Use ||x - x_hat|| instead of ||Ax - prox|| as the second break test.
  bool corrected_point_check = false;
};

/// Smoothing gradient method with epochs [2^l, 2^(l+1)). Only max_iters and the
/// reference objective of `stop` apply; the break test uses epsilon.
RunRecord solve_rsg_epochs(const SmoothedProblem& problem, const StiefelPoint& x1,
                           const ScheduleConfig& cfg, const EpochOptions& opts,
                           const StopRule& stop);

/// Smoothing stochastic gradient method over iterations 1..K (K = stop.max_iters
/// unless the tolerance or reference stops it first). The output index R is
/// drawn with Prob(R = k) proportional to 2 gamma_k - l_k gamma_k^2.
RunRecord solve_rssg(const SmoothedProblem& problem, const StiefelPoint& x1,
                     const ScheduleConfig& cfg, const StopRule& stop, std::uint64_t seed);

/// Stochastic smoothing method with epochs l = 0..max_epoch and one sampled
/// index per epoch. stop.max_iters additionally caps the iteration count.
RunRecord solve_rssg_epochs(const SmoothedProblem& problem, const StiefelPoint& x1,
                            const ScheduleConfig& cfg, int max_epoch, const StopRule& stop,
                            std::uint64_t seed);

struct SubgradientOptions {
  std::optional<double> step_scale;  ///< c in gamma_k = c / sqrt(k); default 1 / l_grad_f
  RetractionKind retraction = RetractionKind::Polar;
};

/// Riemannian subgradient baseline. Stops when phi(x^k) <= F_M + 1e-10 or after
/// stop.max_iters steps; the tolerance is not used.
RunRecord solve_rsub(const SmoothedProblem& problem, const StiefelPoint& x1,
                     const SubgradientOptions& opts, const StopRule& stop);

}  // namespace rsmooth
