#include "rsmooth/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace rsmooth {

namespace {

constexpr double kDescentSlack = 1e-10;
constexpr double kMinStepScale = 1e-14;
constexpr double kInitialStepScale = 1.0;
// Practical c never exceeds this multiple of 1/l_1, so gamma_k l_k < 2 for all k.
constexpr double kPracticalStepCap = 1.9;
constexpr std::uint64_t kOutputStreamMix = 0x9E3779B97F4A7C15ULL;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool finite(double v) { return std::isfinite(v); }

/// State shared by all smoothing solvers: the record under construction and
/// the clock.
class RunContext {
 public:
  RunContext(std::string algorithm, const ResolvedSchedule& sched, const StopRule& stop,
             std::uint64_t seed)
      : start_(Clock::now()) {
    rec_.algorithm = std::move(algorithm);
    rec_.seed = seed;
    rec_.step_mode = std::string(to_string(sched.mode));
    rec_.mu0 = sched.mu0;
    rec_.step_scale = sched.step_scale;
    rec_.gradient_bound = sched.gradient_bound;
    rec_.alpha = sched.alpha;
    rec_.beta = sched.beta;
    rec_.tol = stop.tol;
    rec_.max_iters = stop.max_iters;
    rec_.reference_objective = stop.reference_objective;
  }

  RunRecord& record() { return rec_; }
  double elapsed() const { return seconds_since(start_); }

  void push(TraceRow row) {
    row.seconds = elapsed();
    const bool ok = finite(row.mu) && finite(row.gamma) && finite(row.ell) &&
                    finite(row.grad_norm) && finite(row.prox_residual) && finite(row.smoothed) &&
                    finite(row.objective);
    rec_.rows.push_back(row);
    if (!ok) fail("non-finite value at iteration " + std::to_string(row.k));
  }

  [[noreturn]] void fail(const std::string& what) {
    rec_.total_seconds = elapsed();
    throw NumericFailure(rec_.algorithm + ": " + what, rec_);
  }

  RunRecord finish(StopReason reason, const StiefelPoint& last) {
    rec_.stop_reason = reason;
    rec_.last_iterate = last.matrix();
    if (rec_.output.size() == 0) rec_.output = last.matrix();
    rec_.total_seconds = elapsed();
    return std::move(rec_);
  }

 private:
  Clock::time_point start_;
  RunRecord rec_;
};

struct Evaluated {
  SmoothedEval eval;
  TangentVector grad;
  TraceRow row;
};

Evaluated evaluate_at(const SmoothedProblem& problem, const ResolvedSchedule& sched,
                      const StiefelPoint& x, Index k) {
  SmoothedEval e = problem.evaluate(x.matrix(), sched.mu(k));
  TangentVector g = project_tangent(x, e.euclidean_grad);
  TraceRow row;
  row.k = k;
  row.mu = sched.mu(k);
  row.ell = sched.ell(problem, k);
  row.gamma = sched.gamma(k, row.ell);
  row.grad_norm = g.norm();
  row.prox_residual = e.prox_residual;
  row.smoothed = e.value;
  row.objective = e.f + problem.h().value(e.ax);
  return {std::move(e), std::move(g), row};
}

std::optional<StopReason> check_stop(const TraceRow& row, const StopRule& stop) {
  if (std::max(row.grad_norm, row.prox_residual) <= stop.tol) return StopReason::Tolerance;
  if (stop.reference_objective &&
      row.objective <= *stop.reference_objective - StopRule::kReferenceSlack) {
    return StopReason::BeatReference;
  }
  if (row.k > stop.max_iters) return StopReason::MaxIters;
  return std::nullopt;
}

bool enforce_descent(const ScheduleConfig& cfg) {
  return cfg.enforce_descent.value_or(cfg.step_mode == StepMode::Theory);
}

/// Takes the deterministic step from `cur` and, when enabled, checks the
/// sufficient-decrease inequality of F_k along it.
StiefelPoint descent_step(const SmoothedProblem& problem, const ScheduleConfig& cfg,
                          RunContext& ctx, const StiefelPoint& x, const Evaluated& cur) {
  StiefelPoint next = retract(x, cur.grad.scaled(-cur.row.gamma), cfg.retraction);
  if (cfg.check_descent) {
    const double lhs = problem.smoothed_value(next.matrix(), cur.row.mu);
    const double rhs =
        cur.row.smoothed - 0.5 * cur.row.gamma * cur.row.grad_norm * cur.row.grad_norm;
    if (!finite(lhs)) ctx.fail("non-finite smoothed value after step " + std::to_string(cur.row.k));
    RunRecord& rec = ctx.record();
    ++rec.descent_checks;
    const double excess = lhs - rhs;
    rec.max_descent_excess = rec.descent_checks == 1 ? excess : std::max(rec.max_descent_excess, excess);
    if (excess > kDescentSlack) {
      ++rec.descent_violations;
      if (enforce_descent(cfg)) {
        throw DescentViolation("descent inequality violated at k = " +
                               std::to_string(cur.row.k) + " by " + std::to_string(excess));
      }
    }
  }
  return next;
}

void check_start(const SmoothedProblem& problem, const StiefelPoint& x1, const StopRule& stop) {
  if (x1.rows() != problem.n() || x1.cols() != problem.r()) {
    throw DimensionError("initial point has the wrong shape");
  }
  if (!(stop.tol > 0)) throw ParameterError("stop rule: tol must be positive");
  if (stop.max_iters < 0) throw ParameterError("stop rule: max_iters must be nonnegative");
}

/// Samples batch indices with probability proportional to the batch weights.
class BatchSampler {
 public:
  explicit BatchSampler(const SmoothTerm& f) {
    std::vector<double> w(static_cast<std::size_t>(f.batch_count()));
    for (Index p = 0; p < f.batch_count(); ++p) w[static_cast<std::size_t>(p)] = f.batch_probability(p);
    dist_ = std::discrete_distribution<Index>(w.begin(), w.end());
  }
  Index operator()(std::mt19937_64& rng) { return dist_(rng); }

 private:
  std::discrete_distribution<Index> dist_;
};

double output_weight(const TraceRow& row) {
  return 2.0 * row.gamma - row.ell * row.gamma * row.gamma;
}

void require_positive_weight(const TraceRow& row) {
  const double w = output_weight(row);
  if (!(w > 0)) {
    throw ConfigurationError("stepsize gamma_" + std::to_string(row.k) + " = " +
                             std::to_string(row.gamma) + " violates gamma * l < 2 (l = " +
                             std::to_string(row.ell) + ")");
  }
}

std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Rsg: return "rsg";
    case Algorithm::RsgEpochs: return "rsg-epochs";
    case Algorithm::Rssg: return "rssg";
    case Algorithm::RssgEpochs: return "rssg-epochs";
    case Algorithm::Rsub: return "rsub";
  }
  return "unknown";
}

std::string_view to_string(StepMode mode) {
  return mode == StepMode::Theory ? "theory" : "practical";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Rsg, Algorithm::RsgEpochs, Algorithm::Rssg,
                      Algorithm::RssgEpochs, Algorithm::Rsub}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigurationError("unknown algorithm '" + std::string(name) +
                           "' (expected rsg, rsg-epochs, rssg, rssg-epochs or rsub)");
}

StepMode parse_step_mode(std::string_view name) {
  if (name == "theory") return StepMode::Theory;
  if (name == "practical") return StepMode::Practical;
  throw ConfigurationError("unknown step mode '" + std::string(name) +
                           "' (expected theory or practical)");
}

bool is_stochastic(Algorithm algo) {
  return algo == Algorithm::Rssg || algo == Algorithm::RssgEpochs;
}

StopRule StopRule::defaults(const SmoothedProblem& problem, Algorithm algo) {
  StopRule s;
  s.tol = 1e-8 * static_cast<double>(problem.n() * problem.r());
  s.max_iters = algo == Algorithm::Rsub ? 10'000 : 1000;
  return s;
}

double ResolvedSchedule::mu(Index k) const {
  return mu0 * std::pow(static_cast<double>(k), -exponent);
}

double ResolvedSchedule::ell(const SmoothedProblem& problem, Index k) const {
  return problem.smoothness_constant(mu(k), gradient_bound, alpha, beta);
}

double ResolvedSchedule::gamma(Index k, double ell_k) const {
  const double kd = static_cast<double>(k);
  if (mode == StepMode::Theory) {
    return stochastic ? step_scale / (ell_k * ell_k * ell_k) : 1.0 / ell_k;
  }
  return stochastic ? step_scale * std::pow(kd, -0.6) : step_scale * std::cbrt(1.0 / kd);
}

namespace {

double default_mu0(const SmoothedProblem& problem, const ScheduleConfig& cfg) {
  const double rho = problem.h().weak_convexity();
  const double mu0 = cfg.mu0.value_or(rho > 0 ? 0.5 / rho : ScheduleConfig::kConvexDefaultMu0);
  validate_smoothing(problem.h(), mu0);
  return mu0;
}

double resolve_gradient_bound(const SmoothedProblem& problem, const ScheduleConfig& cfg,
                              double mu0) {
  if (cfg.gradient_bound) {
    if (!(*cfg.gradient_bound >= 0)) throw ParameterError("gradient bound G must be nonnegative");
    return *cfg.gradient_bound;
  }
  return problem.estimate_gradient_bound(mu0);
}

/// Largest c = c0 / 2^j with F_1(R(-c g)) <= F_1(x) - c/2 ||g||^2.
double backtrack_scale(const SmoothedProblem& problem, const StiefelPoint& x1, double mu1,
                       RetractionKind kind) {
  const SmoothedEval e = problem.evaluate(x1.matrix(), mu1);
  const TangentVector g = project_tangent(x1, e.euclidean_grad);
  const double gg = g.norm() * g.norm();
  double c = kInitialStepScale;
  if (gg == 0.0) return c;
  while (c > kMinStepScale) {
    try {
      const StiefelPoint trial = retract(x1, g.scaled(-c), kind);
      if (problem.smoothed_value(trial.matrix(), mu1) <= e.value - 0.5 * c * gg) return c;
    } catch (const DegenerateStepError&) {
    }
    c *= 0.5;
  }
  throw DegenerateStepError("step-scale calibration found no decreasing step");
}

}  // namespace

ResolvedSchedule resolve_schedule(const SmoothedProblem& problem, const StiefelPoint& x1,
                                  const ScheduleConfig& cfg, bool stochastic) {
  if (!(cfg.alpha > 0) || !(cfg.beta >= 0)) {
    throw ParameterError("schedule: need alpha > 0 and beta >= 0");
  }
  ResolvedSchedule s;
  s.mode = cfg.step_mode;
  s.stochastic = stochastic;
  s.exponent = stochastic ? 0.2 : 1.0 / 3.0;
  s.alpha = cfg.alpha;
  s.beta = cfg.beta;
  s.mu0 = default_mu0(problem, cfg);
  s.gradient_bound = resolve_gradient_bound(problem, cfg, s.mu0);

  if (cfg.step_mode == StepMode::Theory) {
    if (stochastic) {
      ScheduleConfig c = cfg;
      c.mu0 = s.mu0;
      c.gradient_bound = s.gradient_bound;
      s.step_scale = theory_constants(problem, x1, c).omega;
    } else {
      s.step_scale = 1.0;
    }
    return s;
  }

  if (cfg.step_scale) {
    if (!(*cfg.step_scale > 0)) throw ParameterError("step scale c must be positive");
    s.step_scale = *cfg.step_scale;
  } else {
    s.step_scale = std::min(backtrack_scale(problem, x1, s.mu(1), cfg.retraction),
                            kPracticalStepCap / s.ell(problem, 1));
  }
  return s;
}

TheoryConstants theory_constants(const SmoothedProblem& problem, const StiefelPoint& x1,
                                 const ScheduleConfig& cfg) {
  const double rho = problem.h().weak_convexity();
  if (!(rho > 0)) {
    throw ConfigurationError(
        "theory constants need a weakly convex h with rho > 0; use the practical step mode");
  }
  const double mu0 = default_mu0(problem, cfg);
  const double g = resolve_gradient_bound(problem, cfg, mu0);
  const double a2 = cfg.alpha * cfg.alpha;
  const double an = problem.a().norm();
  const double lf = problem.f().gradient_lipschitz();
  const double lh = problem.h().lipschitz();
  const double fstar = cfg.lower_bound.value_or(problem.lower_bound());

  TheoryConstants tc;
  tc.omega1 = a2 * lf + 2.0 * g * cfg.beta + 2.0 * rho * a2 * an * an;
  tc.omega2 = problem.smoothed_value(x1.matrix(), mu0) - fstar + lh * lh / (2.0 * rho);
  if (auto smin = problem.a().sigma_min()) {
    const double t = lf / *smin * std::pow(2.0 * rho, -1.5) * lh;
    tc.omega3 = t * t / (a2 * an * an);
  }
  tc.omega4 = 2.0 * rho * a2 * an * an;
  tc.omega = 2.0 * tc.omega4 * tc.omega4 * tc.omega4 / tc.omega1;
  return tc;
}

double deterministic_rate_bound(const TheoryConstants& tc, Index k) {
  return 2.0 * std::sqrt(tc.omega1 * tc.omega2) / std::cbrt(static_cast<double>(k));
}

double epoch_iteration_budget(const TheoryConstants& tc, double rho, double lipschitz_h,
                              double epsilon) {
  const double a = 8.0 * std::sqrt(std::pow(tc.omega1 * tc.omega2, 3.0));
  const double b = std::pow(lipschitz_h / (2.0 * rho), 3.0);
  return 2.0 * std::max(a, b) / (epsilon * epsilon * epsilon);
}

double stochastic_rate_bound(const TheoryConstants& tc, double sigma_sq, Index k) {
  const double kd = static_cast<double>(k);
  const double w1 = tc.omega1, w4 = tc.omega4;
  return (tc.omega2 * std::pow(w1, 4) / std::pow(w4, 3) +
          2.0 * sigma_sq * w1 * w1 / (w4 * w4) * std::log(3.0 * kd)) *
         std::pow(kd, -0.4);
}

StationarityResiduals stationarity_residuals(const SmoothedProblem& problem,
                                             const StiefelPoint& x, double mu) {
  const SmoothedEval e = problem.evaluate(x.matrix(), mu);
  StationarityResiduals r;
  r.grad_norm = project_tangent(x, e.euclidean_grad).norm();
  r.prox_residual = e.prox_residual;
  if (problem.a().surjective()) {
    r.corrected_residual = (x.matrix() - problem.a().correct_point(x.matrix(), e.prox)).norm();
  }
  return r;
}

bool OutputSampler::offer(Index k, double weight, std::mt19937_64& rng) {
  if (!(weight > 0) || !std::isfinite(weight)) {
    throw ConfigurationError("output weight at k = " + std::to_string(k) + " is not positive");
  }
  total_ += weight;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (!selected_ || u * total_ < weight) {
    selected_ = k;
    return true;
  }
  return false;
}

RunRecord solve_rsg(const SmoothedProblem& problem, const StiefelPoint& x1,
                    const ScheduleConfig& cfg, const StopRule& stop) {
  check_start(problem, x1, stop);
  const ResolvedSchedule sched = resolve_schedule(problem, x1, cfg, false);
  RunContext ctx("rsg", sched, stop, 0);
  StiefelPoint x = x1;
  for (Index k = 1;; ++k) {
    Evaluated cur = evaluate_at(problem, sched, x, k);
    ctx.push(cur.row);
    if (auto reason = check_stop(cur.row, stop)) return ctx.finish(*reason, x);
    x = descent_step(problem, cfg, ctx, x, cur);
  }
}

RunRecord solve_rsg_epochs(const SmoothedProblem& problem, const StiefelPoint& x1,
                           const ScheduleConfig& cfg, const EpochOptions& opts,
                           const StopRule& stop) {
  check_start(problem, x1, stop);
  if (!(opts.epsilon > 0)) throw ParameterError("epoch tolerance epsilon must be positive");
  const ResolvedSchedule sched = resolve_schedule(problem, x1, cfg, false);
  RunContext ctx("rsg-epochs", sched, stop, 0);
  RunRecord& rec = ctx.record();

  StiefelPoint x = x1;
  Evaluated cur = evaluate_at(problem, sched, x, 1);
  ctx.push(cur.row);
  for (int l = 0;; ++l) {
    const Index first = Index{1} << l;
    EpochRecord ep;
    ep.l = l;
    ep.first_k = first;
    ep.best_grad_norm = std::numeric_limits<double>::infinity();
    ep.best_k = first;
    for (Index k = first; k < 2 * first; ++k) {
      ep.last_k = k;
      if (stop.reference_objective &&
          cur.row.objective <= *stop.reference_objective - StopRule::kReferenceSlack) {
        rec.epochs.push_back(ep);
        return ctx.finish(StopReason::BeatReference, x);
      }
      if (k > stop.max_iters) {
        rec.epochs.push_back(ep);
        return ctx.finish(StopReason::MaxIters, x);
      }
      x = descent_step(problem, cfg, ctx, x, cur);
      cur = evaluate_at(problem, sched, x, k + 1);
      ctx.push(cur.row);
      if (cur.row.grad_norm <= ep.best_grad_norm) {
        ep.best_grad_norm = cur.row.grad_norm;
        ep.best_k = k + 1;
        double second = cur.row.prox_residual;
        if (opts.corrected_point_check) {
          second = (x.matrix() - problem.a().correct_point(x.matrix(), cur.eval.prox)).norm();
        }
        if (ep.best_grad_norm <= opts.epsilon && second <= opts.epsilon) {
          rec.epochs.push_back(ep);
          return ctx.finish(StopReason::Tolerance, x);
        }
      }
    }
    rec.epochs.push_back(ep);
  }
}

namespace {

/// One stochastic step from `x` using a sampled batch.
StiefelPoint stochastic_step(const SmoothedProblem& problem, const ScheduleConfig& cfg,
                             const StiefelPoint& x, const Evaluated& cur, Index batch) {
  const Matrix g = problem.f().batch_gradient(x.matrix(), batch) + cur.eval.euclidean_grad -
                   cur.eval.smooth_grad;
  const TangentVector eta = project_tangent(x, g);
  return retract(x, eta.scaled(-cur.row.gamma), cfg.retraction);
}

}  // namespace

RunRecord solve_rssg(const SmoothedProblem& problem, const StiefelPoint& x1,
                     const ScheduleConfig& cfg, const StopRule& stop, std::uint64_t seed) {
  check_start(problem, x1, stop);
  const ResolvedSchedule sched = resolve_schedule(problem, x1, cfg, true);
  RunContext ctx("rssg", sched, stop, seed);
  RunRecord& rec = ctx.record();
  std::mt19937_64 batch_rng(seed);
  std::mt19937_64 output_rng(seed ^ kOutputStreamMix);
  BatchSampler sampler(problem.f());
  OutputSampler output;
  std::vector<double> weights;

  StiefelPoint x = x1;
  for (Index k = 1;; ++k) {
    Evaluated cur = evaluate_at(problem, sched, x, k);
    ctx.push(cur.row);
    std::optional<StopReason> reason = check_stop(cur.row, stop);
    // The output index ranges over the iterates that were stepped from, plus
    // the final one when the run ends early on tolerance or reference.
    if (!reason || *reason != StopReason::MaxIters || k == 1) {
      require_positive_weight(cur.row);
      weights.push_back(output_weight(cur.row));
      if (output.offer(k, weights.back(), output_rng)) rec.output = x.matrix();
    }
    if (reason) {
      rec.sampled_index = output.selected();
      rec.output_weights = normalized(std::move(weights));
      return ctx.finish(*reason, x);
    }
    x = stochastic_step(problem, cfg, x, cur, sampler(batch_rng));
  }
}

RunRecord solve_rssg_epochs(const SmoothedProblem& problem, const StiefelPoint& x1,
                            const ScheduleConfig& cfg, int max_epoch, const StopRule& stop,
                            std::uint64_t seed) {
  check_start(problem, x1, stop);
  if (max_epoch < 0 || max_epoch > 40) throw ParameterError("max epoch must lie in [0, 40]");
  const ResolvedSchedule sched = resolve_schedule(problem, x1, cfg, true);
  RunContext ctx("rssg-epochs", sched, stop, seed);
  RunRecord& rec = ctx.record();
  std::mt19937_64 batch_rng(seed);
  std::mt19937_64 output_rng(seed ^ kOutputStreamMix);
  BatchSampler sampler(problem.f());

  StiefelPoint x = x1;
  StopReason reason = StopReason::MaxIters;
  bool done = false;
  for (int l = 0; l <= max_epoch && !done; ++l) {
    const Index first = Index{1} << l;
    EpochRecord ep;
    ep.l = l;
    ep.first_k = first;
    OutputSampler output;
    Matrix sampled;
    for (Index k = first; k < 2 * first; ++k) {
      Evaluated cur = evaluate_at(problem, sched, x, k);
      ctx.push(cur.row);
      const std::optional<StopReason> r = check_stop(cur.row, stop);
      if (r) {
        reason = *r;
        done = true;
      }
      if (r == StopReason::MaxIters) break;
      require_positive_weight(cur.row);
      ep.last_k = k;
      ep.weights.push_back(output_weight(cur.row));
      if (output.offer(k, ep.weights.back(), output_rng)) sampled = x.matrix();
      if (done) break;
      x = stochastic_step(problem, cfg, x, cur, sampler(batch_rng));
    }
    if (!output.selected()) break;
    ep.weights = normalized(std::move(ep.weights));
    ep.sampled_index = output.selected();
    const StiefelPoint xr(sampled);
    const StationarityResiduals res =
        stationarity_residuals(problem, xr, sched.mu(*ep.sampled_index));
    ep.sampled_grad_norm = res.grad_norm;
    ep.sampled_prox_residual = res.prox_residual;
    ep.sampled_corrected_residual = res.corrected_residual;
    rec.epochs.push_back(std::move(ep));
    rec.output = sampled;
    rec.sampled_index = rec.epochs.back().sampled_index;
    rec.output_weights = rec.epochs.back().weights;
  }
  if (!done) {
    // Record the iterate produced by the last step of the final epoch.
    Evaluated cur = evaluate_at(problem, sched, x, rec.rows.back().k + 1);
    ctx.push(cur.row);
  }
  return ctx.finish(reason, x);
}

RunRecord solve_rsub(const SmoothedProblem& problem, const StiefelPoint& x1,
                     const SubgradientOptions& opts, const StopRule& stop) {
  check_start(problem, x1, stop);
  const double c = opts.step_scale.value_or(1.0 / problem.f().gradient_lipschitz());
  if (!(c > 0) || !std::isfinite(c)) throw ParameterError("subgradient step scale must be positive");
  ResolvedSchedule sched;
  sched.step_scale = c;
  RunContext ctx("rsub", sched, stop, 0);
  ctx.record().step_mode = "diminishing";
  ctx.record().alpha = ctx.record().beta = 0.0;

  StiefelPoint x = x1;
  for (Index k = 1;; ++k) {
    const TangentVector g = problem.riemannian_subgradient(x);
    TraceRow row;
    row.k = k;
    row.gamma = c / std::sqrt(static_cast<double>(k));
    row.grad_norm = g.norm();
    row.objective = problem.objective(x.matrix());
    row.smoothed = row.objective;
    ctx.push(row);
    if (stop.reference_objective &&
        row.objective <= *stop.reference_objective + StopRule::kReferenceSlack) {
      return ctx.finish(StopReason::BeatReference, x);
    }
    if (k > stop.max_iters) return ctx.finish(StopReason::MaxIters, x);
    x = retract(x, g.scaled(-row.gamma), opts.retraction);
  }
}

}  // namespace rsmooth
