#include "spde/measure_change.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spde/errors.hpp"
#include "spde/parallel.hpp"

namespace spde {

std::shared_ptr<const SolutionShift> make_shift(ProfilePtr u0, ProfilePtr h) {
  if (!u0 || !h) throw ConfigError("shift: u0 and h profiles required");
  auto shift = std::make_shared<SolutionShift>();
  shift->u0 = std::move(u0);
  shift->h = std::move(h);
  return shift;
}

DriftSpec shift_to_zero(ProfilePtr u0, ProfilePtr h, const DriftSpec& g,
                        const GridSpec& grid) {
  validate_grid(grid);
  validate_drift(g);
  auto payload = std::make_shared<ShiftDrift>();
  payload->base = std::make_shared<DriftSpec>(g);
  payload->shift = make_shift(std::move(u0), std::move(h));
  payload->nu = grid.nu;
  payload->theta = grid.theta;
  payload->dt = grid.dt;
  payload->dx = grid.dx();

  DriftSpec out;
  out.family = DriftFamily::shift_induced;
  out.induced = payload;

  // Sampled sup of the correction term over grid nodes and (up to 2048)
  // step times; the correction is drift_eval minus the base drift.
  const std::size_t nsteps = grid.steps();
  const std::size_t stride = std::max<std::size_t>(1, nsteps / 2048);
  double sup = 0.0;
  DriftSpec correction_only = out;
  auto no_base = std::make_shared<ShiftDrift>(*payload);
  no_base->base = std::make_shared<DriftSpec>(zero_drift());
  correction_only.induced = no_base;
  for (std::size_t n = 0; n < nsteps; n += stride) {
    const double t = grid.dt * static_cast<double>(n);
    for (std::size_t j = 0; j <= grid.nx; ++j) {
      const double x = grid.dx() * static_cast<double>(j);
      sup = std::max(sup, std::abs(drift_eval(correction_only, t, x, 0.0)));
    }
  }
  out.bound = g.bound + sup;
  return out;
}

double log_density(const TrajectoryRecord& record, const SigmaSpec& sigma,
                   const DriftSpec& drift) {
  if (record.begin_fields.size() != record.slices.size()) {
    throw std::invalid_argument("log_density: record fields/slices mismatch");
  }
  if (drift.family == DriftFamily::zero) return 0.0;
  double ito = 0.0;
  double compensator = 0.0;
  for (std::size_t n = 0; n < record.slices.size(); ++n) {
    const Field& field = record.begin_fields[n];
    const NoiseSlice& slice = record.slices[n];
    if (field.values.size() != slice.values.size()) {
      throw std::invalid_argument("log_density: field/slice size mismatch");
    }
    const double t = field.time;
    const double dtdx = slice.dt * slice.dx;
    for (std::size_t j = 0; j < slice.values.size(); ++j) {
      const double x = slice.dx * static_cast<double>(j);
      const double u = field.values[j];
      const double s = sigma_eval(sigma, t, x, u);
      if (!(std::abs(s) > 1e-300)) {
        throw NumericalError("density: sigma vanished, ellipticity violated");
      }
      const double r = drift_eval(drift, t, x, u) / s;
      ito += r * slice.values[j];
      compensator += r * r * dtdx;
    }
  }
  return ito - 0.5 * compensator;
}

double density(const TrajectoryRecord& record, const SigmaSpec& sigma,
               const DriftSpec& drift) {
  return std::exp(log_density(record, sigma, drift));
}

CsVerdict cs_check(double q_prob, double p_prob, double m_bound, double se_q,
                   double se_p, double se_m) {
  if (!(q_prob >= 0.0 && q_prob <= 1.0) || !(p_prob >= 0.0 && p_prob <= 1.0)) {
    throw std::domain_error("cs_check: probabilities must lie in [0, 1]");
  }
  if (!(m_bound > 0.0)) {
    throw std::domain_error("cs_check: m_bound must be > 0");
  }
  CsVerdict verdict;
  verdict.bound = std::sqrt(p_prob) * m_bound;
  double rel = 0.0;
  if (p_prob > 0.0) rel += 0.25 * (se_p / p_prob) * (se_p / p_prob);
  rel += (se_m / m_bound) * (se_m / m_bound);
  if (q_prob > 0.0) rel += (se_q / q_prob) * (se_q / q_prob);
  rel = std::sqrt(rel);
  verdict.margin = verdict.bound * (1.0 + 3.0 * rel) - q_prob;
  verdict.holds = verdict.margin >= 0.0;
  return verdict;
}

CsExperiment cs_experiment(const SigmaSpec& sigma, const DriftSpec& g,
                           const GridSpec& grid, double eps, std::size_t n,
                           MasterSeed master) {
  validate_sigma(sigma);
  validate_drift(g);
  validate_grid(grid);
  if (n == 0) throw ConfigError("cs_experiment: replicas must be >= 1");

  struct Slot {
    double indicator_p = 0.0;
    double indicator_q = 0.0;
    double dens = 0.0;
  };
  std::vector<Slot> slots(n);
  const DriftSpec none = zero_drift();

  parallel_for(n, [&](std::size_t i) {
    // The P-measure run cannot early-exit: the density and its second moment
    // are full-horizon functionals even when the event fails early.
    SolveOptions options;
    TrajectoryRecord record;
    options.record = &record;
    {
      StreamHandle stream = derive_stream(master, i);
      Field u0 = constant_field(grid, 0.0);
      const TrajectorySummary run = solve(u0, sigma, none, grid, stream, options);
      slots[i].indicator_p = run.sup_dev <= eps ? 1.0 : 0.0;
      slots[i].dens = density(record, sigma, g);
    }
    {
      StreamHandle stream = derive_stream(master, n + i);
      SolveOptions q_options;
      q_options.eps = eps;
      Field u0 = constant_field(grid, 0.0);
      const TrajectorySummary run = solve(u0, sigma, g, grid, stream, q_options);
      slots[i].indicator_q = run.exit_time ? 0.0 : 1.0;
    }
  });

  CsExperiment out;
  double sum_p = 0.0, sum_q = 0.0, sum_d = 0.0, sum_d2 = 0.0;
  for (const Slot& s : slots) {
    sum_p += s.indicator_p;
    sum_q += s.indicator_q;
    sum_d += s.dens;
    sum_d2 += s.dens * s.dens;
  }
  const double dn = static_cast<double>(n);
  out.p_hat = sum_p / dn;
  out.q_hat = sum_q / dn;
  out.se_p = std::sqrt(std::max(0.0, out.p_hat * (1.0 - out.p_hat) / dn));
  out.se_q = std::sqrt(std::max(0.0, out.q_hat * (1.0 - out.q_hat) / dn));
  out.mean_density = sum_d / dn;
  const double mean_d2 = sum_d2 / dn;
  double var_d = 0.0, var_d2 = 0.0;
  for (const Slot& s : slots) {
    var_d += (s.dens - out.mean_density) * (s.dens - out.mean_density);
    var_d2 += (s.dens * s.dens - mean_d2) * (s.dens * s.dens - mean_d2);
  }
  var_d /= std::max(1.0, dn - 1.0);
  var_d2 /= std::max(1.0, dn - 1.0);
  out.se_density = std::sqrt(var_d / dn);
  out.m_hat = std::sqrt(mean_d2);
  out.se_m = out.m_hat > 0.0 ? 0.5 * std::sqrt(var_d2 / dn) / out.m_hat : 0.0;
  out.verdict = cs_check(out.q_hat, out.p_hat, out.m_hat, out.se_q, out.se_p,
                         out.se_m);
  return out;
}

}  // namespace spde
