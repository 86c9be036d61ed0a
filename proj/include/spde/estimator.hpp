#pragma once

// Small-ball probability estimators for the event {sup |u - h| <= eps over
// [0, T] x [0, 1]}: direct Monte Carlo (optionally with endpoint pinning so
// it targets the same chained event as splitting), fixed-effort multilevel
// splitting over the stretched time mesh, supremum tail curves of the pure
// noise term over parabolic boxes, and pathwise coupling diagnostics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/profiles.hpp"
#include "spde/rng.hpp"
#include "spde/solver.hpp"

namespace spde {

struct BallEvent {
  double eps = 0.0;  // radius; 0 is the degenerate null event
  double T = 0.0;
  ProfilePtr h;      // reference path; null means 0
  ProfilePtr u0;     // initial profile; null means 0
};

// Checks the initial-gap condition sup_x |u0(x) - h(0,x)| < eps/2 on the grid
// nodes (skipped for the degenerate eps = 0 event). Throws ConfigError.
void validate_event(const BallEvent& event, const GridSpec& grid);

// Parabolic event meshes: t_n = n c0 eps^4, x_n = n c1 eps^2 with
// c1 = sqrt(theta c0), and the stretched stage mesh t_hat_n = n c0 eps^{4 beta}.
struct MeshSpec {
  double c0 = 0.1;
  double theta = 4.0;
  double beta = 1.0;
  double eps = 0.0;

  double c1() const;
  double t_n(std::size_t n) const;
  double x_n(std::size_t n) const;
  double t_hat(std::size_t n) const;
  std::size_t n1(double T) const;      // min n with t_n > T
  std::size_t n2() const;              // min n with x_n > 1
  std::size_t n_hat1(double T) const;  // floor(T / eps^{4 beta})
  // Stages needed for the stage mesh to cover [0, T].
  std::size_t stage_count(double T) const;
};

void validate_mesh(const MeshSpec& mesh);

enum class EstimateMethod { direct, splitting };

struct ProbabilityEstimate {
  double eps = 0.0;
  double p_hat = 0.0;
  double log_p = 0.0;
  double se_log = 0.0;
  double ci_lo = 0.0;  // 95% interval on the probability scale
  double ci_hi = 1.0;
  EstimateMethod method = EstimateMethod::direct;
  std::size_t replicas = 0;  // direct replicas, or particles per stage
  std::uint64_t seed = 0;
  std::vector<double> stage_survival;          // splitting only
  std::optional<std::size_t> extinction_stage; // splitting only
};

struct DirectOptions {
  // When set, the estimate targets the chained event: the deviation must
  // also be <= pin_level at each pin time.
  std::vector<double> pin_times;
  double pin_level = 0.0;
};

ProbabilityEstimate direct_mc(const BallEvent& event, const SigmaSpec& sigma,
                              const DriftSpec& drift, const GridSpec& grid,
                              std::size_t n, MasterSeed master,
                              const DirectOptions& options = {});

// One solve per replica under common random numbers; the estimates are
// exactly monotone in eps per replica. eps values need not be sorted.
std::vector<ProbabilityEstimate> direct_mc_sweep(
    const BallEvent& event, const std::vector<double>& eps_values,
    const SigmaSpec& sigma, const DriftSpec& drift, const GridSpec& grid,
    std::size_t n, MasterSeed master);

// Fixed-effort splitting over the stage mesh: particles evolve across
// stages I_n = [t_hat_n, t_hat_{n+1}] (snapped to grid steps, final stage
// ends at T); a particle survives a stage when the deviation stays <= eps
// throughout and is <= eps/3 at the stage end; survivors are resampled back
// to K particles. p_hat is the product of stage survival fractions.
ProbabilityEstimate splitting_mc(const BallEvent& event, const SigmaSpec& sigma,
                                 const DriftSpec& drift, const GridSpec& grid,
                                 const MeshSpec& mesh, std::size_t particles,
                                 MasterSeed master);

// The chained event splitting_mc targets, as solve() pinning options.
DirectOptions chained_event_options(const BallEvent& event,
                                    const GridSpec& grid, const MeshSpec& mesh);

// Empirical tail of sup |N(t,x)| over the box [0, a eps^4] x
// [(k_box-1) eps^2, k_box eps^2] where N solves the equation with g = 0,
// u0 = 0: probs[i] = P(sup > lambdas[i] * eps).
struct TailCurve {
  std::vector<double> lambdas;
  std::vector<double> probs;
  std::vector<double> se;      // binomial standard errors
  std::vector<double> se_log;  // delta-method errors of log probs
  double a = 1.0;
  double eps = 0.0;
  double c2 = 1.0;  // upper ellipticity bound of the generating sigma
  std::size_t k_box = 1;
  std::size_t replicas = 0;
};
TailCurve tail_curve(double a, double eps, const std::vector<double>& lambdas,
                     const SigmaSpec& sigma, const GridSpec& grid,
                     std::size_t n, MasterSeed master, std::size_t k_box = 1);

// Reflection series for P(sup_{s<=t} |B_s| < eps), B standard Brownian.
struct SeriesValue {
  double value = 0.0;
  bool converged = false;
};
SeriesValue brownian_oracle(double t, double eps, std::size_t terms);

// Direct Monte Carlo for the same Brownian ball event on a dt grid, with the
// Brownian-bridge barrier-crossing correction removing the monitoring bias.
ProbabilityEstimate brownian_ball_mc(double t, double eps, double dt,
                                     std::size_t n, MasterSeed master);

// Pathwise gap between the solution and the frozen-coefficient Gaussian
// comparison run on common noise over the first stage [0, t_hat_1].
struct CouplingStats {
  double median = 0.0;
  double q10 = 0.0, q25 = 0.0, q75 = 0.0, q90 = 0.0;
  double max = 0.0;
  double fraction_small = 0.0;  // fraction of replicas with sup <= eps/6
  double fraction_ci_lo = 0.0, fraction_ci_hi = 1.0;
  double horizon = 0.0;
  std::size_t replicas = 0;
};
CouplingStats coupling_diagnostic(const SigmaSpec& sigma, const MeshSpec& mesh,
                                  const GridSpec& grid, std::size_t n,
                                  MasterSeed master);

// Pathwise equality of the solve with sigma(u) and the solve with
// sigma(clip(eps, u)) on common noise, valid while sup |u| <= eps.
struct ClipReport {
  bool agree = true;
  std::optional<double> first_divergence;  // first time fields differ > tol
  std::optional<double> exit_time;         // first time sup |u| > eps
  double tol = 1e-12;
};
ClipReport clipped_agreement(const SigmaSpec& sigma, double eps,
                             const GridSpec& grid, StreamHandle& stream);

}  // namespace spde
