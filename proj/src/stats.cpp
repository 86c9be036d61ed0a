#include "spde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

namespace spde {

double normal_quantile(double p) {
  // Wichura's algorithm AS 241 (PPND16), ~16 significant digits.
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile requires p in (0, 1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) *
                     r +
                 6.7265770927008700853e+4) *
                    r +
                4.5921953931549871457e+4) *
                   r +
               1.3731693765509461125e+4) *
                  r +
              1.9715909503065514427e+3) *
                 r +
             1.3314166789178437745e+2) *
                r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) *
                     r +
                 3.9307895800092710610e+4) *
                    r +
                2.1213794301586595867e+4) *
                   r +
               5.3941960214247511077e+3) *
                  r +
              6.8718700749205790830e+2) *
                 r +
             4.2313330701600911252e+1) *
                r +
            1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e+0) *
                r +
            3.64784832476320460504e+0) *
               r +
           5.76949722146069140550e+0) *
              r +
          4.63033784615654529590e+0) *
             r +
         1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e+0) *
              r +
          2.05319162663775882187e+0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e+0) *
              r +
          5.46378491116411436990e+0) *
             r +
         6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return q < 0.0 ? -value : value;
}

BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials,
                                 double level) {
  if (trials == 0) {
    throw std::domain_error("clopper_pearson requires trials > 0");
  }
  if (successes > trials) {
    throw std::domain_error("clopper_pearson requires successes <= trials");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("clopper_pearson requires level in (0, 1)");
  }
  const double n = static_cast<double>(trials);
  const double x = static_cast<double>(successes);
  BinomialInterval ci;
  if (successes == 0) {
    ci.lo = 0.0;
    ci.hi = 1.0 - std::pow(1.0 - level, 1.0 / n);
    return ci;
  }
  if (successes == trials) {
    ci.lo = std::pow(1.0 - level, 1.0 / n);
    ci.hi = 1.0;
    return ci;
  }
  const double alpha = 1.0 - level;
  boost::math::beta_distribution<double> lo_dist(x, n - x + 1.0);
  boost::math::beta_distribution<double> hi_dist(x + 1.0, n - x);
  ci.lo = boost::math::quantile(lo_dist, alpha / 2.0);
  ci.hi = boost::math::quantile(hi_dist, 1.0 - alpha / 2.0);
  return ci;
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> se) {
  if (x.size() != y.size() || (!se.empty() && se.size() != x.size())) {
    throw std::invalid_argument("weighted_line_fit: mismatched lengths");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("weighted_line_fit: need at least 2 points");
  }
  const std::size_t n = x.size();
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (!se.empty() && se[i] > 0.0 && std::isfinite(se[i])) {
      w = 1.0 / (se[i] * se[i]);
    }
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw std::invalid_argument("weighted_line_fit: degenerate design");
  }
  LineFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.se_slope = std::sqrt(sw / det);
  fit.se_intercept = std::sqrt(swxx / det);

  const double ybar = swy / sw;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (!se.empty() && se[i] > 0.0 && std::isfinite(se[i])) {
      w = 1.0 / (se[i] * se[i]);
    }
    const double fitted = fit.intercept + fit.slope * x[i];
    ss_res += w * (y[i] - fitted) * (y[i] - fitted);
    ss_tot += w * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("sample_mean: empty input");
  }
  double s = 0.0;
  for (double v : xs) s += v;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw std::invalid_argument("sample_variance: need at least 2 points");
  }
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double v : xs) s += (v - m) * (v - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sample_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) {
    throw std::invalid_argument("sample_quantile: empty input");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("sample_quantile: q must lie in [0, 1]");
  }
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace spde
