#include "rsmooth/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rsmooth {

RateFit fit_rate(const std::vector<TraceRow>& rows) {
  constexpr std::size_t kMinRows = 100;
  if (rows.size() < kMinRows) {
    throw ParameterError("rate fit needs at least 100 trace rows, got " +
                         std::to_string(rows.size()));
  }
  const std::size_t burn = rows.size() / 10;
  double run_min = rows.front().grad_norm;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    run_min = std::min(run_min, rows[i].grad_norm);
    if (i < burn) continue;
    if (!(run_min > 0) || rows[i].k < 1) {
      throw ParameterError("rate fit needs positive gradient norms and iteration indices");
    }
    xs.push_back(std::log(static_cast<double>(rows[i].k)));
    ys.push_back(std::log(run_min));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.points = static_cast<Index>(xs.size());
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace rsmooth
