#include "spde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "spde/errors.hpp"

namespace spde {

namespace {

bool is_zero_profile(const ProfilePtr& p) { return !p || p->id() == "zero"; }

double max_abs_deviation(const Field& field, const Profile* h, double dx) {
  double dev = 0.0;
  if (h == nullptr) {
    for (double v : field.values) dev = std::max(dev, std::abs(v));
    return dev;
  }
  for (std::size_t j = 0; j < field.values.size(); ++j) {
    const double x = dx * static_cast<double>(j);
    dev = std::max(dev, std::abs(field.values[j] - h->eval(field.time, x)));
  }
  return dev;
}

}  // namespace

std::size_t GridSpec::steps() const {
  const double raw = T / dt;
  const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(n, 1);
}

std::size_t GridSpec::steps_to(double t) const {
  const auto n = static_cast<std::size_t>(std::llround(t / dt));
  return std::min(n, steps());
}

void validate_grid(const GridSpec& grid) {
  if (grid.nx < 4) throw ConfigError("grid.nx: need at least 4 cells");
  if (!(grid.dt > 0.0)) throw ConfigError("grid.dt: must be > 0");
  if (!(grid.T >= grid.dt)) throw ConfigError("grid.T: must be >= dt");
  if (!(grid.nu > 0.0)) throw ConfigError("grid.nu: must be > 0");
  if (!(grid.theta >= 0.0 && grid.theta <= 1.0)) {
    throw ConfigError("grid.theta: must lie in [0, 1]");
  }
}

Field make_field(const GridSpec& grid, const Profile& u0) {
  Field field;
  field.values.resize(grid.nx + 1);
  const double dx = grid.dx();
  for (std::size_t j = 0; j <= grid.nx; ++j) {
    field.values[j] = u0.eval(0.0, dx * static_cast<double>(j));
  }
  return field;
}

Field constant_field(const GridSpec& grid, double value) {
  Field field;
  field.values.assign(grid.nx + 1, value);
  return field;
}

double trapezoid_mass(const Field& field, double dx) {
  const std::size_t n = field.values.size();
  if (n < 2) throw std::invalid_argument("trapezoid_mass: need >= 2 nodes");
  double sum = 0.5 * (field.values.front() + field.values.back());
  for (std::size_t j = 1; j + 1 < n; ++j) sum += field.values[j];
  return sum * dx;
}

ThetaScheme::ThetaScheme(const GridSpec& grid) : grid_(grid) {
  validate_grid(grid);
  const std::size_t nodes = grid.nx + 1;
  const double a = grid.theta * grid.nu * grid.dt / (grid.dx() * grid.dx());
  lower_interior_ = -a;
  lower_last_ = -2.0 * a;
  upper_.resize(nodes, 0.0);
  inv_.resize(nodes, 0.0);
  rhs_.resize(nodes, 0.0);

  const double diag = 1.0 + 2.0 * a;
  double pivot = diag;
  inv_[0] = 1.0 / pivot;
  upper_[0] = -2.0 * a * inv_[0];
  for (std::size_t i = 1; i < nodes; ++i) {
    const double lower = (i == nodes - 1) ? lower_last_ : lower_interior_;
    pivot = diag - lower * upper_[i - 1];
    inv_[i] = 1.0 / pivot;
    if (i < nodes - 1) upper_[i] = -a * inv_[i];
  }
}

void ThetaScheme::thomas_solve(std::vector<double>& d) const {
  const std::size_t nodes = d.size();
  d[0] *= inv_[0];
  for (std::size_t i = 1; i < nodes; ++i) {
    const double lower = (i == nodes - 1) ? lower_last_ : lower_interior_;
    d[i] = (d[i] - lower * d[i - 1]) * inv_[i];
  }
  for (std::size_t i = nodes - 1; i-- > 0;) {
    d[i] -= upper_[i] * d[i + 1];
  }
}

void ThetaScheme::step(Field& field, const NoiseSlice* slice,
                       const SigmaSpec& sigma, const DriftSpec& drift) const {
  const std::size_t nodes = grid_.nx + 1;
  if (field.values.size() != nodes) {
    throw std::invalid_argument("step: field size does not match grid");
  }
  if (slice != nullptr && slice->values.size() != nodes) {
    throw std::invalid_argument("step: noise slice size does not match grid");
  }
  const double dx = grid_.dx();
  const double dt = grid_.dt;
  const double b = (1.0 - grid_.theta) * grid_.nu * dt / (dx * dx);
  const double t = field.time;
  const std::vector<double>& u = field.values;
  std::vector<double>& r = rhs_;

  for (std::size_t j = 0; j < nodes; ++j) {
    double lap;
    if (j == 0) {
      lap = 2.0 * (u[1] - u[0]);
    } else if (j == nodes - 1) {
      lap = 2.0 * (u[nodes - 2] - u[nodes - 1]);
    } else {
      lap = u[j - 1] - 2.0 * u[j] + u[j + 1];
    }
    const double x = dx * static_cast<double>(j);
    double value = u[j] + b * lap;
    if (drift.family != DriftFamily::zero) {
      value += dt * drift_eval(drift, t, x, u[j]);
    }
    if (slice != nullptr) {
      value += sigma_eval(sigma, t, x, u[j]) * slice->values[j] / dx;
    }
    r[j] = value;
  }

  thomas_solve(r);

  for (std::size_t j = 0; j < nodes; ++j) {
    if (!std::isfinite(r[j])) {
      char msg[96];
      std::snprintf(msg, sizeof(msg),
                    "solver: non-finite field after step %lld (t=%.6g)",
                    static_cast<long long>(std::llround(t / dt)) + 1, t + dt);
      throw NumericalError(msg);
    }
  }
  field.values.swap(rhs_);
  field.time = t + dt;
}

TrajectorySummary solve(const Field& u0, const SigmaSpec& sigma,
                        const DriftSpec& drift, const GridSpec& grid,
                        StreamHandle& stream, const SolveOptions& options) {
  ThetaScheme scheme(grid);
  const double dx = grid.dx();
  const std::size_t nsteps = grid.steps();
  const Profile* h =
      is_zero_profile(options.h) ? nullptr : options.h.get();

  for (double t : options.checkpoints) {
    if (t < -1e-12 || t > grid.T * (1.0 + 1e-9) + 1e-12) {
      throw ConfigError("output.checkpoints: time outside [0, T]");
    }
  }
  std::vector<std::size_t> pin_steps;
  pin_steps.reserve(options.pin_times.size());
  for (double t : options.pin_times) pin_steps.push_back(grid.steps_to(t));
  std::sort(pin_steps.begin(), pin_steps.end());
  pin_steps.erase(std::unique(pin_steps.begin(), pin_steps.end()),
                  pin_steps.end());

  Field field = u0;
  field.time = 0.0;

  TrajectorySummary summary;
  summary.sup_dev = max_abs_deviation(field, h, dx);
  auto snapshot_if_requested = [&](std::size_t step_index) {
    for (double t : options.checkpoints) {
      if (grid.steps_to(t) == step_index) summary.checkpoints.push_back(field);
    }
  };
  snapshot_if_requested(0);
  if (options.eps && summary.sup_dev > *options.eps) {
    summary.exit_time = 0.0;
    return summary;
  }

  NoiseSlice slice;
  slice.dt = grid.dt;
  slice.dx = dx;
  slice.values.resize(grid.nx + 1);
  auto next_pin = pin_steps.begin();
  while (next_pin != pin_steps.end() && *next_pin == 0) ++next_pin;

  for (std::size_t n = 0; n < nsteps; ++n) {
    fill_slice(stream, grid.dt, dx, slice.values);
    if (options.record != nullptr) {
      options.record->begin_fields.push_back(field);
      options.record->slices.push_back(slice);
    }
    scheme.step(field, &slice, sigma, drift);
    field.time = grid.dt * static_cast<double>(n + 1);

    const double dev = max_abs_deviation(field, h, dx);
    summary.sup_dev = std::max(summary.sup_dev, dev);
    snapshot_if_requested(n + 1);

    if (next_pin != pin_steps.end() && *next_pin == n + 1) {
      ++next_pin;
      if (dev > options.pin_level) {
        summary.pins_ok = false;
        return summary;
      }
    }
    if (options.eps && dev > *options.eps) {
      summary.exit_time = field.time;
      return summary;
    }
  }
  return summary;
}

Field heat_deterministic(const Field& u0, const GridSpec& grid, double t) {
  if (t < 0.0) throw std::domain_error("heat_deterministic requires t >= 0");
  ThetaScheme scheme(grid);
  Field field = u0;
  field.time = 0.0;
  const std::size_t nsteps = grid.steps_to(t);
  const SigmaSpec unused = constant_sigma(1.0);
  const DriftSpec none = zero_drift();
  for (std::size_t n = 0; n < nsteps; ++n) {
    scheme.step(field, nullptr, unused, none);
    field.time = grid.dt * static_cast<double>(n + 1);
  }
  return field;
}

}  // namespace spde
