#pragma once

#include <vector>

#include "rsmooth/run_record.hpp"

namespace rsmooth {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  Index points = 0;
};

/// Least-squares line through (log k, log running-min grad_norm), dropping the
/// first 10% of rows as burn-in. Needs at least 100 rows with positive norms;
/// throws ParameterError otherwise.
RateFit fit_rate(const std::vector<TraceRow>& rows);

}  // namespace rsmooth
