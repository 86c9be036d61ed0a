#include "spde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spde/errors.hpp"
#include "spde/stats.hpp"

namespace spde {

ExponentFit fit_exponent(const std::vector<FitPoint>& points) {
  std::vector<double> x, y, se;
  ExponentFit fit;
  fit.eps_min = std::numeric_limits<double>::infinity();
  fit.eps_max = 0.0;
  for (const FitPoint& pt : points) {
    const bool usable = pt.eps > 0.0 && std::isfinite(pt.log_p) &&
                        pt.log_p < 0.0 && pt.se_log >= 0.0 &&
                        std::isfinite(pt.se_log);
    if (!usable) {
      ++fit.points_excluded;
      continue;
    }
    x.push_back(-std::log(pt.eps));
    y.push_back(std::log(-pt.log_p));
    se.push_back(pt.se_log / -pt.log_p);
    fit.eps_min = std::min(fit.eps_min, pt.eps);
    fit.eps_max = std::max(fit.eps_max, pt.eps);
  }
  if (x.size() < 3) {
    throw ConfigError("fit: needs >= 3 points with 0 < p_hat < 1 (got " +
                      std::to_string(x.size()) + ")");
  }
  const LineFit line = weighted_line_fit(x, y, se);
  fit.exponent = line.slope;
  fit.log_prefactor = line.intercept;
  fit.r_squared = line.r_squared;
  fit.std_err = line.se_slope;
  fit.points_used = x.size();
  return fit;
}

WindowCheck bound_window_check(const ExponentFit& fit, double alpha,
                               double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("window: alpha must lie in (0, 1]");
  }
  if (beta < 2.0 - alpha - 1e-12) {
    throw ConfigError("window: beta must be >= 2 - alpha (got beta = " +
                      std::to_string(beta) + ", 2 - alpha = " +
                      std::to_string(2.0 - alpha) + ")");
  }
  WindowCheck check;
  check.lo = 4.0 + 2.0 * alpha;
  check.hi = 2.0 + 4.0 * beta;
  const double e_lo = fit.exponent - 2.0 * fit.std_err;
  const double e_hi = fit.exponent + 2.0 * fit.std_err;
  if (e_hi < check.lo) {
    check.verdict = WindowVerdict::below;
    check.margin = e_hi - check.lo;
  } else if (e_lo > check.hi) {
    check.verdict = WindowVerdict::above;
    check.margin = check.hi - e_lo;
  } else {
    check.verdict = WindowVerdict::inside;
    check.margin = std::min(check.hi - e_lo, e_hi - check.lo);
  }
  return check;
}

const char* window_verdict_name(WindowVerdict verdict) {
  switch (verdict) {
    case WindowVerdict::inside: return "inside";
    case WindowVerdict::below: return "below";
    case WindowVerdict::above: return "above";
  }
  return "unknown";
}

TailFit tail_fit(const TailCurve& curve) {
  if (curve.lambdas.size() != curve.probs.size() ||
      curve.lambdas.size() != curve.se_log.size()) {
    throw ConfigError("tail fit: curve arrays have mismatched lengths");
  }
  std::vector<double> x, y, se;
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i) {
    const double p = curve.probs[i];
    if (!(p > 0.0 && p < 1.0)) continue;
    x.push_back(curve.lambdas[i] * curve.lambdas[i]);
    y.push_back(std::log(p));
    se.push_back(std::isfinite(curve.se_log[i]) ? curve.se_log[i] : 0.0);
  }
  if (x.size() < 3) {
    throw ConfigError("tail fit: needs >= 3 points with 0 < p < 1 (got " +
                      std::to_string(x.size()) + ")");
  }
  const LineFit line = weighted_line_fit(x, y, se);
  TailFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.se_slope = line.se_slope;
  const double sqrt_a = std::sqrt(curve.a);
  fit.K1_hat = std::exp(line.intercept) * std::min(1.0, sqrt_a);
  fit.K2_hat = -line.slope * curve.c2 * curve.c2 * sqrt_a;
  fit.slope_negative_3se = line.slope < -3.0 * line.se_slope;
  fit.majorized = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fitted = line.intercept + line.slope * x[i];
    fit.residuals.push_back(y[i] - fitted);
    if (y[i] > fitted + 2.0 * se[i]) fit.majorized = false;
  }
  fit.ok = line.slope < 0.0;
  return fit;
}

}  // namespace spde
