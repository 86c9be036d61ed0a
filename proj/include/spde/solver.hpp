#pragma once

// Theta-scheme time stepper for du = nu u_xx dt + g dt + sigma dW on [0, 1]
// with reflecting boundaries: the Laplacian is treated semi-implicitly
// (weight theta, default 1/2), drift and noise explicitly at the beginning
// of the step. The tridiagonal factorization is precomputed once per grid.

#include <cstddef>
#include <optional>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/profiles.hpp"
#include "spde/rng.hpp"

namespace spde {

struct GridSpec {
  std::size_t nx = 128;  // spatial cells; nodes = nx + 1
  double dt = 1e-4;
  double T = 1.0;
  double nu = 0.5;
  double theta = 0.5;

  double dx() const { return 1.0 / static_cast<double>(nx); }
  // Whole steps covering [0, T]; T is snapped up to a step multiple.
  std::size_t steps() const;
  std::size_t steps_to(double t) const;  // nearest step index for time t
};

void validate_grid(const GridSpec& grid);

struct Field {
  std::vector<double> values;  // nx + 1 nodal values
  double time = 0.0;
};

Field make_field(const GridSpec& grid, const Profile& u0);
Field constant_field(const GridSpec& grid, double value);

// Trapezoid-weighted spatial mean, the discrete invariant of the Neumann flow.
double trapezoid_mass(const Field& field, double dx);

// Per-step capture of the state and noise a solve consumed, enough to
// re-evaluate change-of-measure densities offline.
struct TrajectoryRecord {
  std::vector<Field> begin_fields;
  std::vector<NoiseSlice> slices;
};

struct SolveOptions {
  std::optional<double> eps;         // early-exit deviation radius
  ProfilePtr h;                      // reference profile; null means 0
  std::vector<double> checkpoints;   // times to snapshot (snapped to steps)
  std::vector<double> pin_times;     // times where the deviation must be
  double pin_level = 0.0;            //   <= pin_level (chained stage events)
  TrajectoryRecord* record = nullptr;
};

struct TrajectorySummary {
  double sup_dev = 0.0;              // max over checked times and nodes
  std::optional<double> exit_time;   // first grid time deviation exceeded eps
  bool pins_ok = true;               // all pin checks satisfied
  std::vector<Field> checkpoints;
};

class ThetaScheme {
public:
  explicit ThetaScheme(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }

  // One step in place. `slice` may be null (deterministic step); otherwise it
  // must hold nx + 1 nodal increments. Throws NumericalError on blow-up.
  void step(Field& field, const NoiseSlice* slice, const SigmaSpec& sigma,
            const DriftSpec& drift) const;

private:
  GridSpec grid_;
  std::vector<double> upper_;  // forward-eliminated upper diagonal of M
  std::vector<double> inv_;    // reciprocals of the eliminated pivots
  double lower_interior_ = 0.0;
  double lower_last_ = 0.0;
  mutable std::vector<double> rhs_;  // scratch, scheme is single-owner per run

  void thomas_solve(std::vector<double>& d) const;
};

// Full trajectory run consuming nx + 1 Gaussians per step from `stream`.
TrajectorySummary solve(const Field& u0, const SigmaSpec& sigma,
                        const DriftSpec& drift, const GridSpec& grid,
                        StreamHandle& stream, const SolveOptions& options = {});

// Deterministic heat flow of u0 to time t (sigma = 0, g = 0 path).
Field heat_deterministic(const Field& u0, const GridSpec& grid, double t);

}  // namespace spde
