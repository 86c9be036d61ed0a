#pragma once

// Small statistics toolbox shared by the estimator and analysis layers:
// normal quantiles, exact binomial intervals, weighted least squares.

#include <cstddef>
#include <span>
#include <vector>

namespace spde {

// Inverse of the standard normal CDF (Wichura's algorithm AS 241, PPND16).
// Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

// Clopper-Pearson interval for x successes out of n trials. For x == 0 the
// upper limit is the one-sided bound at `level`; symmetrically for x == n.
struct BinomialInterval {
  double lo = 0.0;
  double hi = 1.0;
};
BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials,
                                 double level = 0.95);

// Weighted least squares of y on x with known per-point standard errors.
// Parameter errors come from (X^T W X)^-1 with the stated weights (no
// residual rescaling). Points with se <= 0 get unit weight.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  double r_squared = 1.0;
};
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> se);

double sample_mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased
double sample_quantile(std::vector<double> xs, double q);

}  // namespace spde
