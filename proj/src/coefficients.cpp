#include "spde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spde/errors.hpp"

namespace spde {

namespace {

double reflect_unit(double x) {
  if (x < 0.0) x = -x;
  if (x > 1.0) x = 2.0 - x;
  return std::clamp(x, 0.0, 1.0);
}

double holder_term(const SigmaSpec& spec, double u) {
  const double base = std::min(std::abs(u), spec.M);
  return std::min(spec.D * std::pow(base, spec.alpha), spec.C2 - spec.C1);
}

double affine_term(const SigmaSpec& spec, double u) {
  const double base = std::min(std::abs(u), spec.M);
  return std::min(spec.D * base, spec.C2 - spec.C1);
}

}  // namespace

SigmaSpec constant_sigma(double value) {
  SigmaSpec spec;
  spec.family = SigmaFamily::constant;
  spec.C1 = value;
  spec.C2 = value;
  return spec;
}

SigmaSpec holder_sigma(double C1, double C2, double D, double alpha, double M) {
  SigmaSpec spec;
  spec.family = SigmaFamily::holder_power;
  spec.C1 = C1;
  spec.C2 = C2;
  spec.D = D;
  spec.alpha = alpha;
  spec.M = M;
  return spec;
}

void validate_sigma(const SigmaSpec& spec) {
  if (!(spec.C1 > 0.0)) {
    throw ConfigError("sigma.C1: lower ellipticity bound must be > 0");
  }
  if (!(spec.C2 >= spec.C1)) {
    throw ConfigError("sigma.C2: ellipticity bounds inverted (C2 < C1)");
  }
  if (!(spec.D >= 0.0)) {
    throw ConfigError("sigma.D: Holder constant must be >= 0");
  }
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw ConfigError("sigma.alpha: Holder exponent must lie in (0, 1]");
  }
  if (!(spec.M > 0.0)) {
    throw ConfigError("sigma.M: clip level must be > 0");
  }
  if (spec.shift && (!spec.shift->u0 || !spec.shift->h)) {
    throw ConfigError("sigma.shift: incomplete shift profiles");
  }
}

double sigma_eval(const SigmaSpec& spec, double t, double x, double u) {
  if (spec.freeze_u) u = *spec.freeze_u;
  if (spec.clip_u) u = clip(*spec.clip_u, u);
  if (spec.shift) u += spec.shift->eval(t, x);
  switch (spec.family) {
    case SigmaFamily::constant:
      return spec.C1;
    case SigmaFamily::lipschitz_affine:
      return spec.C1 + affine_term(spec, u);
    case SigmaFamily::holder_power:
      return spec.C1 + holder_term(spec, u);
    case SigmaFamily::frozen_profile:
      return 0.5 * (spec.C1 + spec.C2) +
             0.5 * (spec.C2 - spec.C1) * std::sin(std::numbers::pi * x) *
                 std::cos(t);
  }
  throw ConfigError("sigma.family: unknown family");
}

SigmaSpec shifted_sigma(const SigmaSpec& spec,
                        std::shared_ptr<const SolutionShift> shift) {
  SigmaSpec out = spec;
  out.shift = std::move(shift);
  return out;
}

DriftSpec zero_drift() { return DriftSpec{}; }

DriftSpec bounded_drift(double bound, ProfilePtr profile) {
  DriftSpec spec;
  spec.family = DriftFamily::bounded_profile;
  spec.bound = bound;
  spec.profile = profile ? std::move(profile) : sine_cos_profile(bound);
  return spec;
}

void validate_drift(const DriftSpec& spec) {
  if (!(spec.bound >= 0.0) || !std::isfinite(spec.bound)) {
    throw ConfigError("drift.bound: must be finite and >= 0");
  }
  switch (spec.family) {
    case DriftFamily::zero:
      return;
    case DriftFamily::bounded_profile: {
      if (!spec.profile) {
        throw ConfigError("drift.profile: bounded_profile needs a shape");
      }
      const double sup = profile_sup(*spec.profile, 1.0, 128);
      if (sup > spec.bound * (1.0 + 1e-9) + 1e-300) {
        throw ConfigError("drift.bound: profile exceeds the declared bound");
      }
      return;
    }
    case DriftFamily::shift_induced:
      if (!spec.induced || !spec.induced->base || !spec.induced->shift) {
        throw ConfigError("drift: shift_induced payload incomplete");
      }
      if (!(spec.induced->dt > 0.0) || !(spec.induced->dx > 0.0)) {
        throw ConfigError("drift: shift_induced needs positive dt, dx");
      }
      return;
  }
  throw ConfigError("drift.family: unknown family");
}

double drift_eval(const DriftSpec& spec, double t, double x, double u) {
  switch (spec.family) {
    case DriftFamily::zero:
      return 0.0;
    case DriftFamily::bounded_profile:
      return spec.profile->eval(t, x);
    case DriftFamily::shift_induced: {
      const ShiftDrift& sd = *spec.induced;
      const SolutionShift& s = *sd.shift;
      const double dt = sd.dt;
      const double dx = sd.dx;
      const auto laplacian = [&](double time) {
        const double xm = reflect_unit(x - dx);
        const double xp = reflect_unit(x + dx);
        return (s.eval(time, xm) - 2.0 * s.eval(time, x) + s.eval(time, xp)) /
               (dx * dx);
      };
      const double dsdt = (s.eval(t + dt, x) - s.eval(t, x)) / dt;
      const double lap = (1.0 - sd.theta) * laplacian(t) + sd.theta * laplacian(t + dt);
      return drift_eval(*sd.base, t, x, u + s.eval(t, x)) - dsdt + sd.nu * lap;
    }
  }
  throw ConfigError("drift.family: unknown family");
}

double clip(double eps, double z) {
  if (std::abs(z) < eps) return z;
  return std::copysign(eps, z);
}

HolderReport holder_certificate(const SigmaSpec& spec, std::size_t sample_count,
                                std::optional<double> check_D,
                                std::optional<double> check_alpha) {
  const double d = check_D.value_or(spec.D);
  const double a = check_alpha.value_or(spec.alpha);
  HolderReport report;
  const std::size_t n = std::max<std::size_t>(sample_count, 2);
  const double span = 1.5 * spec.M;
  const double offsets[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12};
  const double times[] = {0.0, 0.37, 1.9};
  const double xs[] = {0.0, 0.31, 0.5, 1.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -span + 2.0 * span * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    for (const double t : times) {
      for (const double x : xs) {
        const double su = sigma_eval(spec, t, x, u);
        // Evaluation roundoff (a few ulps of sigma) must not count against
        // the modulus when |u - v|^a is itself tiny.
        const auto slack = [&](double sv) {
          return 8.0 * std::numeric_limits<double>::epsilon() *
                 std::max({std::abs(su), std::abs(sv), 1.0});
        };
        for (const double delta : offsets) {
          const double sv = sigma_eval(spec, t, x, u + delta);
          const double scale = std::pow(delta, a);
          const double ratio = std::abs(su - sv) / scale;
          report.pairs += 1;
          report.max_ratio = std::max(report.max_ratio, ratio);
          if (std::abs(su - sv) > d * scale * (1.0 + 1e-9) + slack(sv)) {
            report.violations += 1;
          }
        }
        // One coarse pair from opposite ends of the sampled range.
        const double v = span - (u + span);
        if (std::abs(u - v) > 0.0) {
          const double sv = sigma_eval(spec, t, x, v);
          const double scale = std::pow(std::abs(u - v), a);
          const double ratio = std::abs(su - sv) / scale;
          report.pairs += 1;
          report.max_ratio = std::max(report.max_ratio, ratio);
          if (std::abs(su - sv) > d * scale * (1.0 + 1e-9) + slack(sv)) {
            report.violations += 1;
          }
        }
      }
    }
  }
  return report;
}

EllipticityReport ellipticity_certificate(const SigmaSpec& spec,
                                          std::size_t sample_count) {
  EllipticityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  report.max_value = -std::numeric_limits<double>::infinity();
  const std::size_t n = std::max<std::size_t>(sample_count, 2);
  const double span = 2.0 * spec.M;
  const double times[] = {0.0, 0.5, 1.7, 3.1};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -span + 2.0 * span * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    for (const double t : times) {
      for (std::size_t j = 0; j <= 8; ++j) {
        const double x = static_cast<double>(j) / 8.0;
        const double v = sigma_eval(spec, t, x, u);
        report.min_value = std::min(report.min_value, v);
        report.max_value = std::max(report.max_value, v);
      }
    }
  }
  report.within_bounds = report.min_value >= spec.C1 - 1e-12 &&
                         report.max_value <= spec.C2 + 1e-12;
  return report;
}

}  // namespace spde
