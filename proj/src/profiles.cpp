#include "spde/profiles.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "spde/errors.hpp"

namespace spde {

namespace {

// Shortest digit string that parses back to the same double, so ids built
// from parsed text ("sine_cos:0.3") keep the spelling the user wrote.
std::string format_number(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

class ZeroProfile final : public Profile {
public:
  double eval(double, double) const override { return 0.0; }
  std::string id() const override { return "zero"; }
};

class ConstantProfile final : public Profile {
public:
  explicit ConstantProfile(double value) : value_(value) {}
  double eval(double, double) const override { return value_; }
  std::string id() const override { return "constant:" + format_number(value_); }

private:
  double value_;
};

class SineCosProfile final : public Profile {
public:
  explicit SineCosProfile(double amp) : amp_(amp) {}
  double eval(double t, double x) const override {
    return amp_ * std::sin(std::numbers::pi * x) * std::cos(t);
  }
  std::string id() const override { return "sine_cos:" + format_number(amp_); }

private:
  double amp_;
};

class CosineProfile final : public Profile {
public:
  CosineProfile(double amp, int k) : amp_(amp), k_(k) {}
  double eval(double, double x) const override {
    return amp_ * std::cos(k_ * std::numbers::pi * x);
  }
  std::string id() const override {
    return "cosine:" + format_number(amp_) + ":" + std::to_string(k_);
  }

private:
  double amp_;
  int k_;
};

class LinearTimeProfile final : public Profile {
public:
  explicit LinearTimeProfile(double rate) : rate_(rate) {}
  double eval(double t, double) const override { return rate_ * t; }
  std::string id() const override { return "linear_t:" + format_number(rate_); }

private:
  double rate_;
};

class FrozenProfile final : public Profile {
public:
  FrozenProfile(ProfilePtr base, double t0) : base_(std::move(base)), t0_(t0) {}
  double eval(double, double x) const override { return base_->eval(t0_, x); }
  std::string id() const override {
    return "frozen:" + format_number(t0_) + ":" + base_->id();
  }

private:
  ProfilePtr base_;
  double t0_;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("profile '" + context + "': bad number '" + text + "'");
  }
}

}  // namespace

void Profile::eval_row(double t, std::span<const double> xs,
                       std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size() && i < out.size(); ++i) {
    out[i] = eval(t, xs[i]);
  }
}

ProfilePtr zero_profile() { return std::make_shared<ZeroProfile>(); }

ProfilePtr constant_profile(double value) {
  return std::make_shared<ConstantProfile>(value);
}

ProfilePtr sine_cos_profile(double amp) {
  return std::make_shared<SineCosProfile>(amp);
}

ProfilePtr cosine_profile(double amp, int k) {
  if (k < 0) throw ConfigError("cosine profile: mode k must be >= 0");
  return std::make_shared<CosineProfile>(amp, k);
}

ProfilePtr linear_time_profile(double rate) {
  return std::make_shared<LinearTimeProfile>(rate);
}

ProfilePtr freeze_at(ProfilePtr base, double t0) {
  if (!base) throw ConfigError("freeze_at: null profile");
  return std::make_shared<FrozenProfile>(std::move(base), t0);
}

ProfilePtr parse_profile(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts.front();
  const std::size_t nargs = parts.size() - 1;
  if (kind == "zero" && nargs == 0) return zero_profile();
  if (kind == "constant" && nargs == 1) {
    return constant_profile(parse_double(parts[1], text));
  }
  if (kind == "sine_cos" && nargs == 1) {
    return sine_cos_profile(parse_double(parts[1], text));
  }
  if (kind == "cosine" && nargs == 2) {
    const double amp = parse_double(parts[1], text);
    const double k = parse_double(parts[2], text);
    if (k < 0 || k != std::floor(k)) {
      throw ConfigError("profile '" + text + "': mode must be a nonnegative integer");
    }
    return cosine_profile(amp, static_cast<int>(k));
  }
  if (kind == "linear_t" && nargs == 1) {
    return linear_time_profile(parse_double(parts[1], text));
  }
  if (kind == "frozen" && nargs >= 2) {
    const double t0 = parse_double(parts[1], text);
    std::string rest = parts[2];
    for (std::size_t i = 3; i < parts.size(); ++i) rest += ":" + parts[i];
    return freeze_at(parse_profile(rest), t0);
  }
  throw ConfigError("unknown profile '" + text +
                    "' (expected zero|constant:V|sine_cos:A|cosine:A:K|linear_t:R)");
}

double profile_sup(const Profile& f, double T, std::size_t samples) {
  double sup = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(samples);
    for (std::size_t j = 0; j <= samples; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(samples);
      sup = std::max(sup, std::abs(f.eval(t, x)));
    }
  }
  return sup;
}

}  // namespace spde
