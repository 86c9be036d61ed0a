#pragma once

// Deterministic space-time profiles f(t, x) used as reference paths, initial
// conditions (evaluated at t = 0) and bounded drift shapes. Each profile has
// a canonical text id ("sine_cos:0.3") that round-trips through configs.

#include <memory>
#include <span>
#include <string>

namespace spde {

class Profile {
public:
  virtual ~Profile() = default;
  virtual double eval(double t, double x) const = 0;
  virtual std::string id() const = 0;
  void eval_row(double t, std::span<const double> xs,
                std::span<double> out) const;
};

using ProfilePtr = std::shared_ptr<const Profile>;

ProfilePtr zero_profile();
ProfilePtr constant_profile(double value);
// amp * sin(pi x) * cos(t)
ProfilePtr sine_cos_profile(double amp);
// amp * cos(k pi x)
ProfilePtr cosine_profile(double amp, int k);
// rate * t
ProfilePtr linear_time_profile(double rate);
// base evaluated at the fixed time t0, ignoring t.
ProfilePtr freeze_at(ProfilePtr base, double t0);

// Parse "zero" | "constant:V" | "sine_cos:A" | "cosine:A:K" | "linear_t:R".
// Throws ConfigError on malformed text.
ProfilePtr parse_profile(const std::string& text);

// Largest |f| over a dense (t, x) sample of [0, T] x [0, 1].
double profile_sup(const Profile& f, double T, std::size_t samples = 512);

}  // namespace spde
