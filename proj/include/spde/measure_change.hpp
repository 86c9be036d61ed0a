#pragma once

// Change-of-measure toolkit: recentring a solve so the reference path and
// initial condition are both zero, the discrete Radon-Nikodym density of a
// drift change, and the Cauchy-Schwarz comparison between the two measures.

#include <cstddef>

#include "spde/coefficients.hpp"
#include "spde/rng.hpp"
#include "spde/solver.hpp"

namespace spde {

// Drift for the recentred variable w = u - u0 - h + h(0,.): the original g
// at the shifted argument minus the discrete heat operator applied to the
// shift s = u0 + h - h(0,.), matched to the theta scheme of `grid` so that a
// w-solve (with shifted sigma) reproduces u - s exactly on common noise.
// The returned bound is g.bound plus the sampled sup of the correction.
DriftSpec shift_to_zero(ProfilePtr u0, ProfilePtr h, const DriftSpec& g,
                        const GridSpec& grid);

// The shift the recentring uses; compose into sigma via shifted_sigma.
std::shared_ptr<const SolutionShift> make_shift(ProfilePtr u0, ProfilePtr h);

// log of the discrete density exp(sum r dW - 1/2 sum r^2 dt dx), r = g/sigma
// evaluated at the beginning-of-step fields the record captured.
double log_density(const TrajectoryRecord& record, const SigmaSpec& sigma,
                   const DriftSpec& drift);
double density(const TrajectoryRecord& record, const SigmaSpec& sigma,
               const DriftSpec& drift);

// Verdict of Q(A) <= sqrt(P(A)) * M with Monte Carlo error allowance.
struct CsVerdict {
  bool holds = false;
  double margin = 0.0;  // inflated bound minus q
  double bound = 0.0;   // sqrt(p) * m
};
CsVerdict cs_check(double q_prob, double p_prob, double m_bound,
                   double se_q = 0.0, double se_p = 0.0, double se_m = 0.0);

// Two-measure simulation of the ball event {sup |u| <= eps} on [0, T]:
// p under the driftless measure, q under drift g, and the empirical second
// moment bound m = sqrt(mean density^2) from the driftless sample.
struct CsExperiment {
  double p_hat = 0.0, se_p = 0.0;
  double q_hat = 0.0, se_q = 0.0;
  double m_hat = 0.0, se_m = 0.0;
  double mean_density = 0.0, se_density = 0.0;
  CsVerdict verdict;
};
CsExperiment cs_experiment(const SigmaSpec& sigma, const DriftSpec& g,
                           const GridSpec& grid, double eps, std::size_t n,
                           MasterSeed master);

}  // namespace spde
