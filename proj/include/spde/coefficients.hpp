#pragma once

// Coefficient families for the equation du = nu u_xx dt + g dt + sigma dW:
// uniformly elliptic, Holder-in-u diffusion coefficients sigma(t,x,u) and
// bounded drifts g(t,x,u), plus the radial clipping map and empirical
// certificates for the ellipticity / Holder / boundedness hypotheses.

#include <cstddef>
#include <memory>
#include <optional>

#include "spde/profiles.hpp"

namespace spde {

// Additive shift of the solution argument, s(t,x) = u0(x) + h(t,x) - h(0,x).
// Composed into coefficients when an experiment is recentred to h = 0, u0 = 0.
struct SolutionShift {
  ProfilePtr u0;
  ProfilePtr h;
  double eval(double t, double x) const {
    return u0->eval(0.0, x) + h->eval(t, x) - h->eval(0.0, x);
  }
};

enum class SigmaFamily { constant, lipschitz_affine, holder_power, frozen_profile };

struct SigmaSpec {
  SigmaFamily family = SigmaFamily::constant;
  double C1 = 1.0;     // lower ellipticity bound, > 0
  double C2 = 1.0;     // upper bound, >= C1
  double D = 0.0;      // Holder constant, >= 0
  double alpha = 1.0;  // Holder exponent in (0, 1]
  double M = 10.0;     // clip level of the u-dependence
  // Argument transforms, applied in this order to the u argument:
  // replace by freeze_u if set, clip to [-clip_u, clip_u] if set, then add
  // the shift s(t,x) if set.
  std::optional<double> freeze_u;
  std::optional<double> clip_u;
  std::shared_ptr<const SolutionShift> shift;
};

SigmaSpec constant_sigma(double value);
SigmaSpec holder_sigma(double C1, double C2, double D, double alpha,
                       double M = 10.0);

// Throws ConfigError on a malformed spec.
void validate_sigma(const SigmaSpec& spec);

// Always within [C1, C2] for a valid spec.
double sigma_eval(const SigmaSpec& spec, double t, double x, double u);

// Copy of `spec` whose u argument is shifted by s(t,x).
SigmaSpec shifted_sigma(const SigmaSpec& spec,
                        std::shared_ptr<const SolutionShift> shift);

enum class DriftFamily { zero, bounded_profile, shift_induced };

struct DriftSpec;

// Payload of a shift-induced drift: the original drift evaluated at the
// shifted argument plus the discrete heat operator applied to the shift,
// matched to the theta scheme so the recentred solve reproduces the original
// one exactly on common noise.
struct ShiftDrift {
  std::shared_ptr<const DriftSpec> base;
  std::shared_ptr<const SolutionShift> shift;
  double nu = 0.5;
  double theta = 0.5;
  double dt = 0.0;
  double dx = 0.0;
};

struct DriftSpec {
  DriftFamily family = DriftFamily::zero;
  double bound = 0.0;   // sup |g|
  ProfilePtr profile;   // bounded_profile shape; default amp*sin(pi x)cos(t)
  std::shared_ptr<const ShiftDrift> induced;
};

DriftSpec zero_drift();
DriftSpec bounded_drift(double bound, ProfilePtr profile = nullptr);

void validate_drift(const DriftSpec& spec);

double drift_eval(const DriftSpec& spec, double t, double x, double u);

// Radial truncation of z to [-eps, eps]; identity on |z| < eps, 1-Lipschitz,
// odd, idempotent.
double clip(double eps, double z);

// Empirical Holder-modulus certificate: deterministic sampling of value pairs
// including near-coincident ones. `check_D` / `check_alpha` default to the
// spec's own constants; violations counts ratios above check_D * (1 + 1e-9).
struct HolderReport {
  double max_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t pairs = 0;
};
HolderReport holder_certificate(const SigmaSpec& spec, std::size_t sample_count,
                                std::optional<double> check_D = {},
                                std::optional<double> check_alpha = {});

// Empirical two-sided bound certificate over a dense (t, x, u) sample.
struct EllipticityReport {
  double min_value = 0.0;
  double max_value = 0.0;
  bool within_bounds = false;
};
EllipticityReport ellipticity_certificate(const SigmaSpec& spec,
                                          std::size_t sample_count);

}  // namespace spde
