#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsmooth/manifold.hpp"

namespace rsmooth {

enum class StopReason { Tolerance, MaxIters, BeatReference };

std::string_view to_string(StopReason reason);

/// One iterate x^k and the quantities evaluated there.
struct TraceRow {
  Index k = 0;
  double mu = 0.0;
  double gamma = 0.0;
  double ell = 0.0;
  double grad_norm = 0.0;      ///< ||grad F_k(x^k)|| (full gradient, also for stochastic runs)
  double prox_residual = 0.0;  ///< ||A x^k - prox_{mu_k h}(A x^k)||
  double smoothed = 0.0;       ///< F_k(x^k)
  double objective = 0.0;      ///< phi(x^k) = f(x^k) + h(A x^k)
  double seconds = 0.0;        ///< solver wall time since start
};

/// Residuals at the output index of one epoch of the stochastic epoch method.
struct EpochRecord {
  int l = 0;
  Index first_k = 0;
  Index last_k = 0;
  double best_grad_norm = 0.0;  ///< S_l (deterministic epochs)
  Index best_k = 0;             ///< k_l (deterministic epochs)
  std::optional<Index> sampled_index;  ///< R_l (stochastic epochs)
  std::vector<double> weights;         ///< normalized Prob(R_l = k), k = first_k..last_k
  double sampled_grad_norm = 0.0;
  double sampled_prox_residual = 0.0;
  std::optional<double> sampled_corrected_residual;
};

struct RunRecord {
  std::string algorithm;
  std::vector<TraceRow> rows;
  std::vector<EpochRecord> epochs;

  Matrix last_iterate;
  Matrix output;  ///< x^R for the stochastic methods, otherwise the last iterate
  std::optional<Index> sampled_index;
  std::vector<double> output_weights;  ///< normalized Prob(R = k), k = 1..|weights|

  StopReason stop_reason = StopReason::MaxIters;
  double total_seconds = 0.0;
  std::uint64_t seed = 0;

  // Resolved schedule echo.
  std::string step_mode;
  double mu0 = 0.0;
  double step_scale = 0.0;
  double gradient_bound = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double tol = 0.0;
  Index max_iters = 0;
  std::optional<double> reference_objective;

  Index descent_checks = 0;
  Index descent_violations = 0;
  double max_descent_excess = 0.0;  ///< max of F_k(x^{k+1}) - (F_k(x^k) - gamma_k/2 ||grad||^2)

  const TraceRow& final_row() const { return rows.back(); }
};

/// Fixed CSV header of per-iteration traces.
inline constexpr std::string_view kTraceHeader =
    "k,mu,gamma,ell,grad_norm,prox_residual,F_k,phi,seconds";

/// Writes the trace. Values use 17 significant digits; seconds are rounded to
/// milliseconds, or written as 0 when `include_timing` is false.
void write_trace_csv(const RunRecord& record, std::ostream& out, bool include_timing = true);
std::vector<TraceRow> read_trace_csv(std::istream& in);

nlohmann::json summary_json(const RunRecord& record);

}  // namespace rsmooth
