#pragma once

// Post-processing of estimator output: weighted power-law fits of -log p
// versus eps, the two-sided decay-exponent window check, and the Gaussian
// tail fit of the noise supremum curve.

#include <cstddef>
#include <vector>

#include "spde/estimator.hpp"

namespace spde {

struct FitPoint {
  double eps = 0.0;
  double log_p = 0.0;
  double se_log = 0.0;
};

struct ExponentFit {
  double exponent = 0.0;       // slope of log(-log p) on log(1/eps)
  double log_prefactor = 0.0;  // intercept: log C in -log p = C eps^{-e}
  double r_squared = 0.0;
  double std_err = 0.0;  // standard error of the exponent
  double eps_min = 0.0;
  double eps_max = 0.0;
  std::size_t points_used = 0;
  std::size_t points_excluded = 0;  // p in {0, 1} or unusable errors
};

// Weighted least squares of log(-log p) on log(1/eps) with delta-method
// errors se_log / |log p|. Points with p in {0, 1} are excluded; fewer than
// 3 usable points throws ConfigError.
ExponentFit fit_exponent(const std::vector<FitPoint>& points);

enum class WindowVerdict { inside, below, above };

struct WindowCheck {
  WindowVerdict verdict = WindowVerdict::inside;
  double lo = 0.0;      // 4 + 2 alpha
  double hi = 0.0;      // 2 + 4 beta
  double margin = 0.0;  // negative when the verdict is below or above
};

// Checks whether [e - 2 se, e + 2 se] meets the admissible exponent window
// [4 + 2 alpha, 2 + 4 beta]. Requires beta >= 2 - alpha (ConfigError).
WindowCheck bound_window_check(const ExponentFit& fit, double alpha,
                               double beta);

const char* window_verdict_name(WindowVerdict verdict);

struct TailFit {
  double K1_hat = 0.0;  // prefactor, including the min(1, sqrt(a)) factor
  double K2_hat = 0.0;  // decay constant, including the c2^2 sqrt(a) factor
  double slope = 0.0;   // raw fitted slope of log p on lambda^2
  double intercept = 0.0;
  double se_slope = 0.0;
  bool slope_negative_3se = false;  // slope < 0 by at least 3 standard errors
  bool majorized = false;  // every point <= fitted value + 2 se on log scale
  bool ok = false;         // negative slope and >= 3 usable points
  std::vector<double> residuals;  // log p - fitted, over used points
};

// Weighted least squares of log p on lambda^2 for the noise-supremum tail
// P(sup > lambda eps) ~ K1 / min(1, sqrt(a)) * exp(-K2 lambda^2 /
// (c2^2 sqrt(a))). Points with p in {0, 1} are excluded; fewer than 3 usable
// points throws ConfigError. A nonnegative fitted slope is reported as
// ok = false, never silently.
TailFit tail_fit(const TailCurve& curve);

}  // namespace spde
