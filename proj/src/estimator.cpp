#include "spde/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spde/errors.hpp"
#include "spde/parallel.hpp"
#include "spde/stats.hpp"

namespace spde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kSplitNoiseBase = 1ULL << 62;
constexpr std::uint64_t kSplitResampleBase = 2ULL << 62;

Field initial_field(const GridSpec& grid, const ProfilePtr& u0) {
  return u0 ? make_field(grid, *u0) : constant_field(grid, 0.0);
}

ProbabilityEstimate binomial_estimate(std::size_t hits, std::size_t n,
                                      double eps, EstimateMethod method,
                                      MasterSeed master) {
  ProbabilityEstimate est;
  est.eps = eps;
  est.method = method;
  est.replicas = n;
  est.seed = master.seed;
  const double dn = static_cast<double>(n);
  est.p_hat = static_cast<double>(hits) / dn;
  const BinomialInterval ci = clopper_pearson(hits, n);
  est.ci_lo = ci.lo;
  est.ci_hi = ci.hi;
  if (hits == 0) {
    est.log_p = -kInf;
    est.se_log = kInf;
  } else {
    est.log_p = std::log(est.p_hat);
    est.se_log = std::sqrt((1.0 - est.p_hat) / (dn * est.p_hat));
  }
  return est;
}

double max_abs(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

void validate_event(const BallEvent& event, const GridSpec& grid) {
  if (!(event.eps >= 0.0) || !std::isfinite(event.eps)) {
    throw ConfigError("event.eps: radius must be finite and >= 0");
  }
  if (!(event.T >= grid.dt)) {
    throw ConfigError("event.T: horizon must be >= grid.dt");
  }
  if (event.eps == 0.0) return;  // degenerate null event, gap check vacuous
  const double dx = grid.dx();
  double gap = 0.0;
  for (std::size_t j = 0; j <= grid.nx; ++j) {
    const double x = dx * static_cast<double>(j);
    const double u0 = event.u0 ? event.u0->eval(0.0, x) : 0.0;
    const double h0 = event.h ? event.h->eval(0.0, x) : 0.0;
    gap = std::max(gap, std::abs(u0 - h0));
  }
  if (!(gap < event.eps / 2.0)) {
    throw ConfigError(
        "event: initial gap sup|u0 - h(0,.)| must be < eps/2 (got " +
        std::to_string(gap) + " vs eps/2 = " + std::to_string(event.eps / 2.0) +
        ")");
  }
}

double MeshSpec::c1() const { return std::sqrt(theta * c0); }

double MeshSpec::t_n(std::size_t n) const {
  return static_cast<double>(n) * c0 * std::pow(eps, 4.0);
}

double MeshSpec::x_n(std::size_t n) const {
  return static_cast<double>(n) * c1() * eps * eps;
}

double MeshSpec::t_hat(std::size_t n) const {
  return static_cast<double>(n) * c0 * std::pow(eps, 4.0 * beta);
}

std::size_t MeshSpec::n1(double T) const {
  return static_cast<std::size_t>(std::floor(T / (c0 * std::pow(eps, 4.0)))) + 1;
}

std::size_t MeshSpec::n2() const {
  return static_cast<std::size_t>(std::floor(1.0 / (c1() * eps * eps))) + 1;
}

std::size_t MeshSpec::n_hat1(double T) const {
  return static_cast<std::size_t>(std::floor(T / std::pow(eps, 4.0 * beta)));
}

std::size_t MeshSpec::stage_count(double T) const {
  const double stage = c0 * std::pow(eps, 4.0 * beta);
  const auto n = static_cast<std::size_t>(std::ceil(T / stage - 1e-9));
  return std::max<std::size_t>(n, 1);
}

void validate_mesh(const MeshSpec& mesh) {
  if (!(mesh.c0 > 0.0 && mesh.c0 < 1.0)) {
    throw ConfigError("mesh.c0: must lie in (0, 1)");
  }
  if (!(mesh.theta > 0.0)) throw ConfigError("mesh.theta: must be > 0");
  if (!(mesh.beta > 0.0)) throw ConfigError("mesh.beta: must be > 0");
  if (!(mesh.eps > 0.0)) throw ConfigError("mesh.eps: must be > 0");
}

ProbabilityEstimate direct_mc(const BallEvent& event, const SigmaSpec& sigma,
                              const DriftSpec& drift, const GridSpec& grid,
                              std::size_t n, MasterSeed master,
                              const DirectOptions& options) {
  validate_sigma(sigma);
  validate_drift(drift);
  validate_grid(grid);
  validate_event(event, grid);
  if (n == 0) throw ConfigError("estimator.replicas: must be >= 1");

  GridSpec run_grid = grid;
  run_grid.T = event.T;
  const Field u0 = initial_field(run_grid, event.u0);

  std::vector<std::uint8_t> success(n, 0);
  parallel_for(n, [&](std::size_t i) {
    StreamHandle stream = derive_stream(master, i);
    SolveOptions opts;
    opts.eps = event.eps;
    opts.h = event.h;
    opts.pin_times = options.pin_times;
    opts.pin_level = options.pin_level;
    const TrajectorySummary run =
        solve(u0, sigma, drift, run_grid, stream, opts);
    success[i] = (!run.exit_time && run.pins_ok && run.sup_dev <= event.eps)
                     ? 1
                     : 0;
  });

  std::size_t hits = 0;
  for (std::uint8_t s : success) hits += s;
  return binomial_estimate(hits, n, event.eps, EstimateMethod::direct, master);
}

std::vector<ProbabilityEstimate> direct_mc_sweep(
    const BallEvent& event, const std::vector<double>& eps_values,
    const SigmaSpec& sigma, const DriftSpec& drift, const GridSpec& grid,
    std::size_t n, MasterSeed master) {
  if (eps_values.empty()) {
    throw ConfigError("event.eps_sweep: needs at least one radius");
  }
  validate_sigma(sigma);
  validate_drift(drift);
  validate_grid(grid);
  if (n == 0) throw ConfigError("estimator.replicas: must be >= 1");
  double eps_min = kInf, eps_max = 0.0;
  for (double e : eps_values) {
    if (!(e > 0.0)) throw ConfigError("event.eps_sweep: radii must be > 0");
    eps_min = std::min(eps_min, e);
    eps_max = std::max(eps_max, e);
  }
  BallEvent strictest = event;
  strictest.eps = eps_min;
  validate_event(strictest, grid);

  GridSpec run_grid = grid;
  run_grid.T = event.T;
  const Field u0 = initial_field(run_grid, event.u0);

  std::vector<double> sup_dev(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    StreamHandle stream = derive_stream(master, i);
    SolveOptions opts;
    opts.eps = eps_max;  // once above every radius the indicators are settled
    opts.h = event.h;
    const TrajectorySummary run =
        solve(u0, sigma, drift, run_grid, stream, opts);
    sup_dev[i] = run.exit_time ? std::nextafter(eps_max, kInf) : run.sup_dev;
  });

  std::vector<ProbabilityEstimate> estimates;
  estimates.reserve(eps_values.size());
  for (double eps : eps_values) {
    std::size_t hits = 0;
    for (double dev : sup_dev) {
      if (dev <= eps) ++hits;
    }
    estimates.push_back(
        binomial_estimate(hits, n, eps, EstimateMethod::direct, master));
  }
  return estimates;
}

DirectOptions chained_event_options(const BallEvent& event,
                                    const GridSpec&, const MeshSpec& mesh) {
  DirectOptions options;
  options.pin_level = event.eps / 3.0;
  const std::size_t stages = mesh.stage_count(event.T);
  for (std::size_t s = 1; s <= stages; ++s) {
    options.pin_times.push_back(std::min(mesh.t_hat(s), event.T));
  }
  return options;
}

ProbabilityEstimate splitting_mc(const BallEvent& event, const SigmaSpec& sigma,
                                 const DriftSpec& drift, const GridSpec& grid,
                                 const MeshSpec& mesh, std::size_t particles,
                                 MasterSeed master) {
  validate_sigma(sigma);
  validate_drift(drift);
  validate_grid(grid);
  validate_event(event, grid);
  validate_mesh(mesh);
  if (particles < 2) throw ConfigError("estimator.particles: must be >= 2");
  if (particles >= (1ULL << 24)) {
    throw ConfigError("estimator.particles: must be < 2^24");
  }
  if (std::abs(mesh.eps - event.eps) > 1e-12 * std::max(1.0, event.eps)) {
    throw ConfigError("mesh.eps must match event.eps");
  }

  GridSpec run_grid = grid;
  run_grid.T = event.T;
  const std::size_t nsteps = run_grid.steps();
  const double dt = run_grid.dt;
  const double dx = run_grid.dx();
  const Profile* h =
      (event.h && event.h->id() != "zero") ? event.h.get() : nullptr;
  const double pin_level = event.eps / 3.0;

  // Stage boundaries in step units, strictly increasing, covering [0, T].
  std::vector<std::size_t> ends;
  {
    const std::size_t stages = mesh.stage_count(event.T);
    std::size_t prev = 0;
    for (std::size_t s = 1; s <= stages && prev < nsteps; ++s) {
      std::size_t idx = run_grid.steps_to(mesh.t_hat(s));
      idx = std::clamp(idx, prev + 1, nsteps);
      ends.push_back(idx);
      prev = idx;
    }
    if (ends.empty() || ends.back() != nsteps) ends.push_back(nsteps);
  }

  ProbabilityEstimate est;
  est.eps = event.eps;
  est.method = EstimateMethod::splitting;
  est.replicas = particles;
  est.seed = master.seed;

  std::vector<Field> states(particles, initial_field(run_grid, event.u0));
  {
    const double dev0 = [&] {
      double d = 0.0;
      for (std::size_t j = 0; j <= run_grid.nx; ++j) {
        const double x = dx * static_cast<double>(j);
        const double ref = h ? h->eval(0.0, x) : 0.0;
        d = std::max(d, std::abs(states[0].values[j] - ref));
      }
      return d;
    }();
    if (dev0 > event.eps) {
      est.p_hat = 0.0;
      est.log_p = -kInf;
      est.se_log = kInf;
      est.extinction_stage = 0;
      return est;
    }
  }

  double log_p = 0.0;
  double var_log = 0.0;
  std::size_t begin = 0;
  for (std::size_t stage = 0; stage < ends.size(); ++stage) {
    const std::size_t end = ends[stage];
    std::vector<std::uint8_t> alive(particles, 0);
    parallel_for(particles, [&](std::size_t k) {
      StreamHandle stream = derive_stream(
          master, kSplitNoiseBase | (static_cast<std::uint64_t>(stage) << 24) |
                      static_cast<std::uint64_t>(k));
      ThetaScheme scheme(run_grid);
      Field& field = states[k];
      NoiseSlice slice;
      slice.dt = dt;
      slice.dx = dx;
      slice.values.resize(run_grid.nx + 1);
      bool ok = true;
      double dev = 0.0;
      for (std::size_t n = begin; n < end; ++n) {
        fill_slice(stream, dt, dx, slice.values);
        scheme.step(field, &slice, sigma, drift);
        field.time = dt * static_cast<double>(n + 1);
        dev = 0.0;
        for (std::size_t j = 0; j <= run_grid.nx; ++j) {
          const double x = dx * static_cast<double>(j);
          const double ref = h ? h->eval(field.time, x) : 0.0;
          dev = std::max(dev, std::abs(field.values[j] - ref));
        }
        if (dev > event.eps) {
          ok = false;
          break;
        }
      }
      alive[k] = (ok && dev <= pin_level) ? 1 : 0;
    });

    std::vector<std::size_t> survivors;
    survivors.reserve(particles);
    for (std::size_t k = 0; k < particles; ++k) {
      if (alive[k]) survivors.push_back(k);
    }
    const double q = static_cast<double>(survivors.size()) /
                     static_cast<double>(particles);
    est.stage_survival.push_back(q);
    if (survivors.empty()) {
      est.p_hat = 0.0;
      est.log_p = -kInf;
      est.se_log = kInf;
      est.ci_lo = 0.0;
      est.ci_hi = 1.0;
      est.extinction_stage = stage;
      return est;
    }
    log_p += std::log(q);
    var_log += (1.0 - q) / (static_cast<double>(particles) * q);

    if (stage + 1 < ends.size()) {
      StreamHandle resample = derive_stream(
          master, kSplitResampleBase | static_cast<std::uint64_t>(stage));
      std::vector<Field> next(particles);
      for (std::size_t k = 0; k < particles; ++k) {
        std::size_t pick = static_cast<std::size_t>(
            resample.next_uniform() * static_cast<double>(survivors.size()));
        pick = std::min(pick, survivors.size() - 1);
        next[k] = states[survivors[pick]];
      }
      states.swap(next);
    }
    begin = end;
  }

  est.log_p = log_p;
  est.p_hat = std::exp(log_p);
  est.se_log = std::sqrt(var_log);
  est.ci_lo = std::clamp(std::exp(log_p - 1.96 * est.se_log), 0.0, 1.0);
  est.ci_hi = std::clamp(std::exp(log_p + 1.96 * est.se_log), 0.0, 1.0);
  return est;
}

TailCurve tail_curve(double a, double eps, const std::vector<double>& lambdas,
                     const SigmaSpec& sigma, const GridSpec& grid,
                     std::size_t n, MasterSeed master, std::size_t k_box) {
  validate_sigma(sigma);
  validate_grid(grid);
  if (!(a > 0.0)) throw ConfigError("tail.a: must be > 0");
  if (!(eps > 0.0)) throw ConfigError("tail.eps: must be > 0");
  if (n == 0) throw ConfigError("tail: replicas must be >= 1");
  if (lambdas.empty()) throw ConfigError("tail.lambda-list: empty");
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i + 1])) {
      throw ConfigError("tail.lambda-list: must be strictly increasing");
    }
  }
  if (!(lambdas.front() >= 0.0)) {
    throw ConfigError("tail.lambda-list: values must be >= 0");
  }
  if (k_box < 1) throw ConfigError("tail.k_box: must be >= 1");
  const double box_T = a * std::pow(eps, 4.0);
  if (box_T > grid.T * (1.0 + 1e-9)) {
    throw ConfigError("tail: box horizon a*eps^4 exceeds grid.T");
  }
  const double x_lo = (static_cast<double>(k_box) - 1.0) * eps * eps;
  const double x_hi = static_cast<double>(k_box) * eps * eps;
  if (x_hi > 1.0 + 1e-9) {
    throw ConfigError("tail: spatial box exceeds [0, 1]");
  }
  const double dx = grid.dx();
  const auto j_lo =
      static_cast<std::size_t>(std::ceil(x_lo / dx - 1e-9));
  const auto j_hi = std::min<std::size_t>(
      grid.nx, static_cast<std::size_t>(std::floor(x_hi / dx + 1e-9)));
  if (j_lo > j_hi) {
    throw ConfigError("tail: spatial box contains no grid nodes; refine nx");
  }
  const std::size_t nsteps =
      std::max<std::size_t>(1, grid.steps_to(box_T));
  const double cutoff = lambdas.back() * eps;
  const DriftSpec none = zero_drift();

  std::vector<double> sups(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    StreamHandle stream = derive_stream(master, i);
    ThetaScheme scheme(grid);
    Field field = constant_field(grid, 0.0);
    NoiseSlice slice;
    slice.dt = grid.dt;
    slice.dx = dx;
    slice.values.resize(grid.nx + 1);
    double sup = 0.0;
    for (std::size_t s = 0; s < nsteps; ++s) {
      fill_slice(stream, grid.dt, dx, slice.values);
      scheme.step(field, &slice, sigma, none);
      field.time = grid.dt * static_cast<double>(s + 1);
      for (std::size_t j = j_lo; j <= j_hi; ++j) {
        sup = std::max(sup, std::abs(field.values[j]));
      }
      if (sup > cutoff) break;
    }
    sups[i] = sup;
  });

  TailCurve curve;
  curve.lambdas = lambdas;
  curve.a = a;
  curve.eps = eps;
  curve.c2 = sigma.C2;
  curve.k_box = k_box;
  curve.replicas = n;
  const double dn = static_cast<double>(n);
  for (double lambda : lambdas) {
    std::size_t hits = 0;
    for (double s : sups) {
      if (s > lambda * eps) ++hits;
    }
    const double p = static_cast<double>(hits) / dn;
    curve.probs.push_back(p);
    const double se = std::sqrt(std::max(0.0, p * (1.0 - p) / dn));
    curve.se.push_back(se);
    curve.se_log.push_back(p > 0.0 ? se / p : kInf);
  }
  return curve;
}

SeriesValue brownian_oracle(double t, double eps, std::size_t terms) {
  if (!(t > 0.0)) throw std::domain_error("brownian_oracle requires t > 0");
  if (!(eps > 0.0)) throw std::domain_error("brownian_oracle requires eps > 0");
  if (terms < 1) throw std::domain_error("brownian_oracle requires terms >= 1");
  const double pi = std::numbers::pi;
  SeriesValue out;
  double last = 0.0;
  for (std::size_t k = 0; k < terms; ++k) {
    const double m = 2.0 * static_cast<double>(k) + 1.0;
    last = (4.0 / pi) * (k % 2 == 0 ? 1.0 : -1.0) / m *
           std::exp(-m * m * pi * pi * t / (8.0 * eps * eps));
    out.value += last;
  }
  out.converged = std::abs(last) < 1e-12;
  return out;
}

ProbabilityEstimate brownian_ball_mc(double t, double eps, double dt,
                                     std::size_t n, MasterSeed master) {
  if (!(t > 0.0) || !(eps > 0.0) || !(dt > 0.0)) {
    throw std::domain_error("brownian_ball_mc requires t, eps, dt > 0");
  }
  if (n == 0) throw ConfigError("brownian_ball_mc: replicas must be >= 1");
  const auto nsteps =
      static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
  const double sqdt = std::sqrt(dt);

  std::vector<double> weights(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    StreamHandle stream = derive_stream(master, i);
    double x = 0.0;
    double w = 1.0;
    for (std::size_t s = 0; s < nsteps; ++s) {
      const double y = x + sqdt * stream.next_gaussian();
      if (std::abs(y) >= eps) {
        w = 0.0;
        break;
      }
      // Brownian-bridge probability of an unseen barrier crossing inside the
      // step, for the upper and lower barrier.
      const double up = std::exp(-2.0 * (eps - x) * (eps - y) / dt);
      const double dn = std::exp(-2.0 * (eps + x) * (eps + y) / dt);
      w *= std::max(0.0, 1.0 - up - dn);
      if (w == 0.0) break;
      x = y;
    }
    weights[i] = w;
  });

  ProbabilityEstimate est;
  est.eps = eps;
  est.method = EstimateMethod::direct;
  est.replicas = n;
  est.seed = master.seed;
  const double dn = static_cast<double>(n);
  double mean = 0.0;
  for (double w : weights) mean += w;
  mean /= dn;
  double var = 0.0;
  for (double w : weights) var += (w - mean) * (w - mean);
  var /= std::max(1.0, dn - 1.0);
  const double se = std::sqrt(var / dn);
  est.p_hat = mean;
  if (mean > 0.0) {
    est.log_p = std::log(mean);
    est.se_log = se / mean;
  } else {
    est.log_p = -kInf;
    est.se_log = kInf;
  }
  est.ci_lo = std::clamp(mean - 1.96 * se, 0.0, 1.0);
  est.ci_hi = std::clamp(mean + 1.96 * se, 0.0, 1.0);
  return est;
}

CouplingStats coupling_diagnostic(const SigmaSpec& sigma, const MeshSpec& mesh,
                                  const GridSpec& grid, std::size_t n,
                                  MasterSeed master) {
  validate_sigma(sigma);
  validate_grid(grid);
  validate_mesh(mesh);
  if (n == 0) throw ConfigError("couple: replicas must be >= 1");

  const std::size_t nsteps = std::min(
      grid.steps(),
      std::max<std::size_t>(1, grid.steps_to(mesh.t_hat(1))));
  const double dx = grid.dx();
  SigmaSpec frozen = sigma;
  frozen.freeze_u = 0.0;
  const DriftSpec none = zero_drift();

  std::vector<double> sups(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    StreamHandle stream = derive_stream(master, i);
    ThetaScheme scheme(grid);
    Field u = constant_field(grid, 0.0);
    Field ug = constant_field(grid, 0.0);
    NoiseSlice slice;
    slice.dt = grid.dt;
    slice.dx = dx;
    slice.values.resize(grid.nx + 1);
    double sup = 0.0;
    for (std::size_t s = 0; s < nsteps; ++s) {
      fill_slice(stream, grid.dt, dx, slice.values);
      scheme.step(u, &slice, sigma, none);
      scheme.step(ug, &slice, frozen, none);
      const double t = grid.dt * static_cast<double>(s + 1);
      u.time = t;
      ug.time = t;
      for (std::size_t j = 0; j <= grid.nx; ++j) {
        sup = std::max(sup, std::abs(u.values[j] - ug.values[j]));
      }
    }
    sups[i] = sup;
  });

  CouplingStats stats;
  stats.replicas = n;
  stats.horizon = grid.dt * static_cast<double>(nsteps);
  stats.median = sample_quantile(sups, 0.5);
  stats.q10 = sample_quantile(sups, 0.10);
  stats.q25 = sample_quantile(sups, 0.25);
  stats.q75 = sample_quantile(sups, 0.75);
  stats.q90 = sample_quantile(sups, 0.90);
  stats.max = *std::max_element(sups.begin(), sups.end());
  std::size_t small = 0;
  const double level = mesh.eps / 6.0;
  for (double s : sups) {
    if (s <= level) ++small;
  }
  stats.fraction_small = static_cast<double>(small) / static_cast<double>(n);
  const BinomialInterval ci = clopper_pearson(small, n);
  stats.fraction_ci_lo = ci.lo;
  stats.fraction_ci_hi = ci.hi;
  return stats;
}

ClipReport clipped_agreement(const SigmaSpec& sigma, double eps,
                             const GridSpec& grid, StreamHandle& stream) {
  validate_sigma(sigma);
  validate_grid(grid);
  if (!(eps > 0.0)) throw ConfigError("clip-check: eps must be > 0");

  SigmaSpec clipped = sigma;
  clipped.clip_u = eps;
  const DriftSpec none = zero_drift();
  const double dx = grid.dx();
  ThetaScheme scheme(grid);
  Field u = constant_field(grid, 0.0);
  Field v = constant_field(grid, 0.0);
  NoiseSlice slice;
  slice.dt = grid.dt;
  slice.dx = dx;
  slice.values.resize(grid.nx + 1);

  ClipReport report;
  const std::size_t nsteps = grid.steps();
  for (std::size_t s = 0; s < nsteps; ++s) {
    fill_slice(stream, grid.dt, dx, slice.values);
    scheme.step(u, &slice, sigma, none);
    scheme.step(v, &slice, clipped, none);
    const double t = grid.dt * static_cast<double>(s + 1);
    u.time = t;
    v.time = t;
    double diff = 0.0;
    for (std::size_t j = 0; j <= grid.nx; ++j) {
      diff = std::max(diff, std::abs(u.values[j] - v.values[j]));
    }
    if (diff > report.tol) {
      report.first_divergence = t;
      report.agree = false;
      return report;
    }
    if (max_abs(u.values) > eps) {
      report.exit_time = t;
      return report;  // agreement holds up to the exit time
    }
  }
  return report;
}

}  // namespace spde
