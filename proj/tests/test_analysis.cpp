#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spde/analysis.hpp"
#include "spde/errors.hpp"

using namespace spde;

namespace {

std::vector<FitPoint> power_law_points(double C, double e,
                                       const std::vector<double>& eps_values) {
  std::vector<FitPoint> points;
  for (double eps : eps_values) {
    FitPoint pt;
    pt.eps = eps;
    pt.log_p = -C * std::pow(eps, -e);
    pt.se_log = 0.01;
    points.push_back(pt);
  }
  return points;
}

TailCurve synthetic_curve(double K1, double K2,
                          const std::vector<double>& lambdas, double a = 1.0,
                          double c2 = 1.0) {
  TailCurve curve;
  curve.lambdas = lambdas;
  curve.a = a;
  curve.c2 = c2;
  curve.eps = 0.25;
  for (double l : lambdas) {
    const double p = K1 * std::exp(-K2 * l * l);
    curve.probs.push_back(p);
    curve.se.push_back(0.01 * p);
    curve.se_log.push_back(0.01);
  }
  return curve;
}

}  // namespace

TEST_CASE("exact power laws are recovered to rounding") {
  const std::vector<double> eps_values = {0.2, 0.25, 0.3, 0.4, 0.5};
  const ExponentFit six = fit_exponent(power_law_points(1.0, 6.0, eps_values));
  CHECK(six.exponent == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(six.log_prefactor == doctest::Approx(0.0).scale(1.0).epsilon(1e-11));
  CHECK(six.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(six.points_used == 5);
  CHECK(six.points_excluded == 0);
  CHECK(six.eps_min == 0.2);
  CHECK(six.eps_max == 0.5);
  CHECK(six.std_err > 0.0);

  const ExponentFit four = fit_exponent(power_law_points(2.0, 4.0, eps_values));
  CHECK(four.exponent == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(four.log_prefactor == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("degenerate probabilities are excluded from the fit") {
  std::vector<FitPoint> points =
      power_law_points(1.0, 6.0, {0.2, 0.25, 0.3, 0.4});
  FitPoint all = {0.6, 0.0, 0.0};  // p = 1
  FitPoint none = {0.15, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};  // p = 0
  points.push_back(all);
  points.push_back(none);
  const ExponentFit fit = fit_exponent(points);
  CHECK(fit.points_used == 4);
  CHECK(fit.points_excluded == 2);
  CHECK(fit.exponent == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(fit.eps_max == 0.4);

  const std::vector<FitPoint> too_few = {points[0], points[1], all, none};
  CHECK_THROWS_AS(fit_exponent(too_few), ConfigError);
}

TEST_CASE("window verdicts against the admissible exponent band") {
  ExponentFit fit;
  fit.std_err = 0.1;

  fit.exponent = 6.0;
  const WindowCheck inside = bound_window_check(fit, 0.8, 1.3);
  CHECK(inside.verdict == WindowVerdict::inside);
  CHECK(inside.lo == doctest::Approx(5.6));
  CHECK(inside.hi == doctest::Approx(7.2));
  CHECK(inside.margin > 0.0);
  CHECK(std::string(window_verdict_name(inside.verdict)) == "inside");

  fit.exponent = 5.0;
  const WindowCheck below = bound_window_check(fit, 0.8, 1.3);
  CHECK(below.verdict == WindowVerdict::below);
  CHECK(below.margin == doctest::Approx(5.2 - 5.6));
  CHECK(std::string(window_verdict_name(below.verdict)) == "below");

  fit.exponent = 8.0;
  const WindowCheck above = bound_window_check(fit, 0.8, 1.3);
  CHECK(above.verdict == WindowVerdict::above);
  CHECK(above.margin == doctest::Approx(7.2 - 7.8));

  // A wide error bar touching the band from either side counts as inside.
  fit.exponent = 5.0;
  fit.std_err = 0.5;
  CHECK(bound_window_check(fit, 0.8, 1.3).verdict == WindowVerdict::inside);
  fit.exponent = 8.0;
  CHECK(bound_window_check(fit, 0.8, 1.3).verdict == WindowVerdict::inside);
}

TEST_CASE("window widens monotonically in beta") {
  ExponentFit fit;
  fit.exponent = 6.0;
  fit.std_err = 0.05;
  double last_hi = 0.0;
  for (double beta : {1.2, 1.3, 1.5, 2.0}) {
    const WindowCheck check = bound_window_check(fit, 0.8, beta);
    CHECK(check.hi > last_hi);
    CHECK(check.lo == doctest::Approx(5.6));
    last_hi = check.hi;
  }
}

TEST_CASE("window hypothesis on alpha and beta") {
  ExponentFit fit;
  fit.exponent = 6.0;
  fit.std_err = 0.1;
  CHECK_THROWS_AS(bound_window_check(fit, 0.0, 1.3), ConfigError);
  CHECK_THROWS_AS(bound_window_check(fit, 1.5, 1.3), ConfigError);
  CHECK_THROWS_AS(bound_window_check(fit, 0.8, 1.1), ConfigError);
  // Equality beta = 2 - alpha is admissible.
  CHECK_NOTHROW(bound_window_check(fit, 0.8, 1.2));
}

TEST_CASE("gaussian tail fit recovers synthetic constants") {
  const std::vector<double> lambdas = {0.6, 0.8, 1.0, 1.25, 1.5, 2.0};
  const TailCurve curve = synthetic_curve(2.0, 3.0, lambdas);
  const TailFit fit = tail_fit(curve);
  CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(fit.K1_hat == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.K2_hat == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.ok);
  CHECK(fit.slope_negative_3se);
  CHECK(fit.majorized);
  CHECK(fit.residuals.size() == lambdas.size());
  for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("tail fit constants carry the box and ellipticity scalings") {
  const std::vector<double> lambdas = {0.6, 0.8, 1.0, 1.25, 1.5};
  const TailFit wide_box = tail_fit(synthetic_curve(2.0, 3.0, lambdas, 4.0));
  CHECK(wide_box.K1_hat == doctest::Approx(2.0));  // min(1, sqrt(a)) caps at 1
  CHECK(wide_box.K2_hat == doctest::Approx(6.0));

  const TailFit small_box = tail_fit(synthetic_curve(2.0, 3.0, lambdas, 0.25));
  CHECK(small_box.K1_hat == doctest::Approx(1.0));
  CHECK(small_box.K2_hat == doctest::Approx(1.5));

  const TailFit doubled =
      tail_fit(synthetic_curve(2.0, 3.0, lambdas, 1.0, 2.0));
  CHECK(doubled.K2_hat == doctest::Approx(12.0));
}

TEST_CASE("tail fit excludes degenerate probabilities and flags bad shapes") {
  const std::vector<double> lambdas = {0.0, 0.6, 0.8, 1.0, 1.25, 4.0};
  TailCurve curve = synthetic_curve(2.0, 3.0, lambdas);
  curve.probs.front() = 1.0;  // sup > 0 almost surely
  curve.probs.back() = 0.0;   // beyond every sample
  curve.se_log.back() = std::numeric_limits<double>::infinity();
  const TailFit fit = tail_fit(curve);
  CHECK(fit.residuals.size() == 4);
  CHECK(fit.slope == doctest::Approx(-3.0).epsilon(1e-12));

  TailCurve bump = synthetic_curve(2.0, 3.0, {0.6, 0.8, 1.0, 1.25, 1.5});
  bump.probs[2] *= std::exp(0.5);
  const TailFit bumped = tail_fit(bump);
  CHECK(!bumped.majorized);
  CHECK(bumped.ok);

  TailCurve rising = synthetic_curve(2.0, 3.0, {0.6, 0.8, 1.0});
  rising.probs = {0.1, 0.2, 0.4};
  const TailFit bad = tail_fit(rising);
  CHECK(!bad.ok);
  CHECK(!bad.slope_negative_3se);

  TailCurve mismatched = synthetic_curve(2.0, 3.0, {0.6, 0.8, 1.0});
  mismatched.probs.pop_back();
  CHECK_THROWS_AS(tail_fit(mismatched), ConfigError);

  TailCurve sparse = synthetic_curve(2.0, 3.0, {0.6, 0.8});
  CHECK_THROWS_AS(tail_fit(sparse), ConfigError);
}
