#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/errors.hpp"
#include "spde/measure_change.hpp"
#include "spde/profiles.hpp"
#include "spde/rng.hpp"
#include "spde/solver.hpp"
#include "spde/stats.hpp"

using namespace spde;

namespace {

GridSpec tiny_grid() {
  GridSpec grid;
  grid.nx = 16;
  grid.dt = 1e-3;
  grid.T = 0.02;
  grid.nu = 0.5;
  grid.theta = 0.5;
  return grid;
}

TrajectoryRecord record_run(const GridSpec& grid, const SigmaSpec& sigma,
                            std::uint64_t replica) {
  TrajectoryRecord record;
  SolveOptions options;
  options.record = &record;
  StreamHandle stream = derive_stream(MasterSeed{404}, replica);
  solve(constant_field(grid, 0.0), sigma, zero_drift(), grid, stream, options);
  return record;
}

}  // namespace

TEST_CASE("recentred solve reproduces the original on common noise") {
  const GridSpec grid = tiny_grid();
  const SigmaSpec sigma = holder_sigma(1.0, 2.0, 0.5, 0.8);
  const DriftSpec g = bounded_drift(0.2);
  const ProfilePtr u0p = cosine_profile(0.3, 2);
  const ProfilePtr hp = sine_cos_profile(0.25);

  SolveOptions options;
  options.checkpoints = {grid.T};
  StreamHandle s1 = derive_stream(MasterSeed{99}, 12);
  StreamHandle s2 = s1;

  const Field u0 = make_field(grid, *u0p);
  const TrajectorySummary original = solve(u0, sigma, g, grid, s1, options);

  const auto shift = make_shift(u0p, hp);
  const SigmaSpec sigma_w = shifted_sigma(sigma, shift);
  const DriftSpec g_w = shift_to_zero(u0p, hp, g, grid);
  const TrajectorySummary recentred =
      solve(constant_field(grid, 0.0), sigma_w, g_w, grid, s2, options);

  REQUIRE(original.checkpoints.size() == 1);
  REQUIRE(recentred.checkpoints.size() == 1);
  for (std::size_t j = 0; j <= grid.nx; ++j) {
    const double x = grid.dx() * static_cast<double>(j);
    const double s = shift->eval(grid.T, x);
    CHECK(std::abs(recentred.checkpoints[0].values[j] + s -
                   original.checkpoints[0].values[j]) < 1e-10);
  }
}

TEST_CASE("pure time-linear reference induces a constant compensating drift") {
  const GridSpec grid = tiny_grid();
  const DriftSpec induced =
      shift_to_zero(zero_profile(), linear_time_profile(1.0), zero_drift(), grid);
  CHECK(induced.family == DriftFamily::shift_induced);
  CHECK(induced.bound == doctest::Approx(1.0));
  for (double t : {0.0, 0.005, 0.015}) {
    for (double x : {0.0, 0.3, 1.0}) {
      CHECK(drift_eval(induced, t, x, 0.7) == doctest::Approx(-1.0));
    }
  }
}

TEST_CASE("zero shift leaves the drift unchanged") {
  const GridSpec grid = tiny_grid();
  const DriftSpec g = bounded_drift(0.3);
  const DriftSpec induced =
      shift_to_zero(zero_profile(), zero_profile(), g, grid);
  CHECK(induced.bound == doctest::Approx(0.3));
  for (double t : {0.0, 0.01}) {
    for (double x : {0.25, 0.5, 0.75}) {
      CHECK(drift_eval(induced, t, x, 0.0) ==
            doctest::Approx(drift_eval(g, t, x, 0.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("density of the null drift change is exactly one") {
  const GridSpec grid = tiny_grid();
  const SigmaSpec sigma = constant_sigma(1.0);
  const TrajectoryRecord record = record_run(grid, sigma, 0);
  CHECK(log_density(record, sigma, zero_drift()) == 0.0);
  CHECK(density(record, sigma, zero_drift()) == 1.0);
}

TEST_CASE("densities average to one and log-densities follow the gaussian law") {
  const GridSpec grid = tiny_grid();
  const SigmaSpec sigma = constant_sigma(1.0);
  const DriftSpec g = bounded_drift(2.0, constant_profile(2.0));
  const std::size_t n = 2000;

  // Constant drift over constant sigma: r = 2, so the log density is
  // N(-Q/2, Q) with Q = r^2 * steps * nodes * dt * dx.
  const double q_var = 4.0 * static_cast<double>(grid.steps()) *
                       static_cast<double>(grid.nx + 1) * grid.dt * grid.dx();

  std::vector<double> logs, densities;
  logs.reserve(n);
  densities.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectoryRecord record = record_run(grid, sigma, i);
    const double ld = log_density(record, sigma, g);
    logs.push_back(ld);
    densities.push_back(std::exp(ld));
  }

  const double log_mean = sample_mean(logs);
  const double log_var = sample_variance(logs);
  CHECK(std::abs(log_mean + 0.5 * q_var) <
        4.0 * std::sqrt(q_var / static_cast<double>(n)));
  CHECK(std::abs(log_var - q_var) <
        4.0 * q_var * std::sqrt(2.0 / static_cast<double>(n - 1)));

  const double mean = sample_mean(densities);
  const double se =
      std::sqrt(sample_variance(densities) / static_cast<double>(n));
  CHECK(std::abs(mean - 1.0) < 4.0 * se + 1e-6);
}

TEST_CASE("doubling the drift shifts the log density by the exact quadratic") {
  const GridSpec grid = tiny_grid();
  const SigmaSpec sigma = constant_sigma(1.0);
  const DriftSpec g1 = bounded_drift(0.7, constant_profile(0.7));
  const DriftSpec g2 = bounded_drift(1.4, constant_profile(1.4));
  const double q_var = 0.49 * static_cast<double>(grid.steps()) *
                       static_cast<double>(grid.nx + 1) * grid.dt * grid.dx();
  for (std::uint64_t r = 0; r < 3; ++r) {
    const TrajectoryRecord record = record_run(grid, sigma, 1000 + r);
    const double l1 = log_density(record, sigma, g1);
    const double l2 = log_density(record, sigma, g2);
    CHECK(std::abs(l2 - 2.0 * l1 + q_var) < 1e-10);
  }
}

TEST_CASE("log density validates its inputs") {
  const GridSpec grid = tiny_grid();
  const SigmaSpec sigma = constant_sigma(1.0);
  TrajectoryRecord record = record_run(grid, sigma, 5);
  record.slices.pop_back();
  CHECK_THROWS_AS(log_density(record, sigma, bounded_drift(0.3)),
                  std::invalid_argument);

  const TrajectoryRecord good = record_run(grid, sigma, 5);
  CHECK_THROWS_AS(log_density(good, constant_sigma(0.0), bounded_drift(0.3)),
                  NumericalError);
}

TEST_CASE("comparison verdicts") {
  const CsVerdict pass = cs_check(0.1, 0.04, 1.0);
  CHECK(pass.holds);
  CHECK(pass.bound == doctest::Approx(0.2));
  CHECK(pass.margin == doctest::Approx(0.1));

  const CsVerdict fail = cs_check(0.5, 0.04, 1.0);
  CHECK(!fail.holds);
  CHECK(fail.margin == doctest::Approx(-0.3));

  // A nominal violation inside the Monte Carlo allowance still passes.
  CHECK(!cs_check(0.21, 0.04, 1.0).holds);
  CHECK(cs_check(0.21, 0.04, 1.0, 0.02).holds);

  CHECK_THROWS_AS(cs_check(-0.1, 0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(cs_check(0.1, 1.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(cs_check(0.1, 0.5, 0.0), std::domain_error);
}

TEST_CASE("two-measure experiment satisfies the comparison inequality") {
  GridSpec grid = tiny_grid();
  grid.T = 0.01;
  const SigmaSpec sigma = constant_sigma(1.0);
  const DriftSpec g = bounded_drift(0.3);
  const CsExperiment out = cs_experiment(sigma, g, grid, 0.3, 200, MasterSeed{8});

  CHECK(out.p_hat >= 0.0);
  CHECK(out.p_hat <= 1.0);
  CHECK(out.q_hat >= 0.0);
  CHECK(out.q_hat <= 1.0);
  CHECK(out.m_hat >= out.mean_density);
  CHECK(std::abs(out.mean_density - 1.0) < 5.0 * out.se_density + 0.01);
  CHECK(out.verdict.bound ==
        doctest::Approx(std::sqrt(out.p_hat) * out.m_hat));
  CHECK(out.verdict.holds);

  CHECK_THROWS_AS(cs_experiment(sigma, g, grid, 0.3, 0, MasterSeed{8}),
                  ConfigError);
}
