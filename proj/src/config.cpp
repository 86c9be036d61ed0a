#include "spde/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spde/errors.hpp"

namespace spde {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(path + ": expected an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(path + "." + item.key() + ": unknown key");
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key,
         T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

SigmaFamily parse_sigma_family(const std::string& name) {
  if (name == "constant") return SigmaFamily::constant;
  if (name == "lipschitz_affine") return SigmaFamily::lipschitz_affine;
  if (name == "holder_power") return SigmaFamily::holder_power;
  if (name == "frozen_profile") return SigmaFamily::frozen_profile;
  throw ConfigError("sigma.family: unknown family '" + name + "'");
}

const char* sigma_family_name(SigmaFamily family) {
  switch (family) {
    case SigmaFamily::constant: return "constant";
    case SigmaFamily::lipschitz_affine: return "lipschitz_affine";
    case SigmaFamily::holder_power: return "holder_power";
    case SigmaFamily::frozen_profile: return "frozen_profile";
  }
  return "constant";
}

DriftFamily parse_drift_family(const std::string& name) {
  if (name == "zero") return DriftFamily::zero;
  if (name == "bounded_profile") return DriftFamily::bounded_profile;
  if (name == "shift_induced") {
    throw ConfigError(
        "drift.family: shift_induced drifts are derived by the measure-change "
        "pipeline and cannot be configured directly");
  }
  throw ConfigError("drift.family: unknown family '" + name + "'");
}

EstimateMethod parse_method(const std::string& name) {
  if (name == "direct") return EstimateMethod::direct;
  if (name == "splitting") return EstimateMethod::splitting;
  throw ConfigError("estimator.method: unknown method '" + name + "'");
}

}  // namespace

const char* method_name(EstimateMethod method) {
  return method == EstimateMethod::splitting ? "splitting" : "direct";
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config: invalid JSON: ") + err.what());
  }
  require_keys(root, "config",
               {"seed", "grid", "sigma", "drift", "event", "mesh", "estimator",
                "output", "small_d"});

  ExperimentConfig config;
  config.seed = get_or<std::uint64_t>(root, "config", "seed", 0);
  config.small_d = get_or<bool>(root, "config", "small_d", false);

  if (root.contains("grid")) {
    const json& grid = root.at("grid");
    require_keys(grid, "grid", {"nx", "dt", "T", "nu", "theta"});
    config.grid.nx = get_or<std::size_t>(grid, "grid", "nx", config.grid.nx);
    config.grid.dt = get_or<double>(grid, "grid", "dt", config.grid.dt);
    config.grid.T = get_or<double>(grid, "grid", "T", config.grid.T);
    config.grid.nu = get_or<double>(grid, "grid", "nu", config.grid.nu);
    config.grid.theta =
        get_or<double>(grid, "grid", "theta", config.grid.theta);
  }

  if (root.contains("sigma")) {
    const json& sigma = root.at("sigma");
    require_keys(sigma, "sigma", {"family", "C1", "C2", "D", "alpha", "M"});
    config.sigma.family = parse_sigma_family(
        get_or<std::string>(sigma, "sigma", "family", "constant"));
    config.sigma.C1 = get_or<double>(sigma, "sigma", "C1", config.sigma.C1);
    config.sigma.C2 = get_or<double>(sigma, "sigma", "C2", config.sigma.C2);
    config.sigma.D = get_or<double>(sigma, "sigma", "D", config.sigma.D);
    config.sigma.alpha =
        get_or<double>(sigma, "sigma", "alpha", config.sigma.alpha);
    config.sigma.M = get_or<double>(sigma, "sigma", "M", config.sigma.M);
  }

  if (root.contains("drift")) {
    const json& drift = root.at("drift");
    require_keys(drift, "drift", {"family", "bound", "profile"});
    config.drift.family = parse_drift_family(
        get_or<std::string>(drift, "drift", "family", "zero"));
    config.drift.bound =
        get_or<double>(drift, "drift", "bound", config.drift.bound);
    config.drift_profile_id =
        get_or<std::string>(drift, "drift", "profile", "zero");
    if (config.drift.family == DriftFamily::bounded_profile) {
      config.drift.profile = parse_profile(config.drift_profile_id);
      config.drift_profile_id = config.drift.profile->id();
    }
  }

  if (root.contains("event")) {
    const json& event = root.at("event");
    require_keys(event, "event", {"eps", "eps_sweep", "h", "u0"});
    if (event.contains("eps") && event.contains("eps_sweep")) {
      throw ConfigError("event: give either eps or eps_sweep, not both");
    }
    if (event.contains("eps")) {
      config.event.eps_values = {
          get_or<double>(event, "event", "eps", 0.0)};
    } else if (event.contains("eps_sweep")) {
      config.event.eps_values =
          get_or<std::vector<double>>(event, "event", "eps_sweep", {});
    }
    config.event.h_id = get_or<std::string>(event, "event", "h", "zero");
    config.event.u0_id = get_or<std::string>(event, "event", "u0", "zero");
  }
  config.event.h = parse_profile(config.event.h_id);
  config.event.h_id = config.event.h->id();
  if (config.event.u0_id == "match_h") {
    config.event.u0 = freeze_at(config.event.h, 0.0);
  } else {
    config.event.u0 = parse_profile(config.event.u0_id);
    config.event.u0_id = config.event.u0->id();
  }

  if (root.contains("mesh")) {
    const json& mesh = root.at("mesh");
    require_keys(mesh, "mesh", {"c0", "theta", "beta"});
    config.mesh.c0 = get_or<double>(mesh, "mesh", "c0", config.mesh.c0);
    config.mesh.theta =
        get_or<double>(mesh, "mesh", "theta", config.mesh.theta);
    config.mesh.beta = get_or<double>(mesh, "mesh", "beta", config.mesh.beta);
  }

  if (root.contains("estimator")) {
    const json& est = root.at("estimator");
    require_keys(est, "estimator", {"method", "replicas", "particles"});
    config.estimator.method = parse_method(
        get_or<std::string>(est, "estimator", "method", "direct"));
    config.estimator.replicas = get_or<std::size_t>(
        est, "estimator", "replicas", config.estimator.replicas);
    config.estimator.particles = get_or<std::size_t>(
        est, "estimator", "particles", config.estimator.particles);
  }

  if (root.contains("output")) {
    const json& output = root.at("output");
    require_keys(output, "output", {"dir", "checkpoints", "format"});
    config.output.dir =
        get_or<std::string>(output, "output", "dir", config.output.dir);
    config.output.checkpoints = get_or<std::vector<double>>(
        output, "output", "checkpoints", config.output.checkpoints);
    config.output.format =
        get_or<std::string>(output, "output", "format", config.output.format);
  }
  return config;
}

std::vector<std::string> validate_config(const ExperimentConfig& config) {
  std::vector<std::string> errors;
  const auto fail = [&errors](const std::string& message) {
    errors.push_back(message);
  };

  if (config.grid.nx < 4) fail("grid.nx: needs at least 4 cells");
  if (!(config.grid.dt > 0.0)) fail("grid.dt: must be > 0");
  if (!(config.grid.T >= config.grid.dt)) fail("grid.T: must be >= grid.dt");
  if (!(config.grid.nu > 0.0)) fail("grid.nu: must be > 0");
  if (!(config.grid.theta >= 0.0 && config.grid.theta <= 1.0)) {
    fail("grid.theta: must lie in [0, 1]");
  }

  if (!(config.sigma.C1 > 0.0)) {
    fail("sigma.C1: lower ellipticity bound must be > 0");
  }
  if (config.sigma.C1 > config.sigma.C2) {
    fail("sigma.C2: ellipticity bounds inverted (C1 > C2)");
  }
  if (!(config.sigma.alpha > 0.0 && config.sigma.alpha <= 1.0)) {
    fail("sigma.alpha: Holder exponent must lie in (0, 1]");
  }
  if (config.sigma.D < 0.0) fail("sigma.D: Holder constant must be >= 0");
  if (!(config.sigma.M > 0.0)) fail("sigma.M: clip level must be > 0");

  if (config.drift.bound < 0.0) fail("drift.bound: must be >= 0");

  if (!(config.mesh.c0 > 0.0 && config.mesh.c0 < 1.0)) {
    fail("mesh.c0: must lie in (0, 1)");
  }
  if (!(config.mesh.theta > 0.0)) fail("mesh.theta: must be > 0");
  if (!(config.mesh.beta > 0.0)) fail("mesh.beta: must be > 0");
  if (!config.small_d &&
      config.mesh.beta < 2.0 - config.sigma.alpha - 1e-12) {
    fail("mesh.beta: beta < 2 - alpha violates the Gaussian-comparison "
         "hypothesis (set small_d for the small-Holder-constant regime)");
  }

  if (config.event.eps_values.empty()) {
    fail("event: needs eps or a nonempty eps_sweep");
  }
  double eps_min = std::numeric_limits<double>::infinity();
  for (double eps : config.event.eps_values) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
      fail("event.eps: radii must be finite and >= 0");
      eps_min = 0.0;
      break;
    }
    eps_min = std::min(eps_min, eps);
  }
  if (errors.empty() && !config.event.eps_values.empty()) {
    BallEvent strictest;
    strictest.eps = eps_min;
    strictest.T = config.grid.T;
    strictest.h = config.event.h;
    strictest.u0 = config.event.u0;
    try {
      validate_event(strictest, config.grid);
    } catch (const ConfigError& err) {
      fail(err.what());
    }
  }

  if (config.estimator.replicas < 1) fail("estimator.replicas: must be >= 1");
  if (config.estimator.method == EstimateMethod::splitting) {
    if (config.estimator.particles < 2) {
      fail("estimator.particles: must be >= 2");
    }
    if (config.estimator.particles >= (1ULL << 24)) {
      fail("estimator.particles: must be < 2^24");
    }
    if (config.event.eps_values.size() != 1) {
      fail("event: splitting runs need a single eps, not a sweep");
    }
  }

  if (config.output.format != "csv") {
    fail("output.format: only 'csv' is supported");
  }
  for (double t : config.output.checkpoints) {
    if (!(t >= 0.0 && t <= config.grid.T)) {
      fail("output.checkpoints: times must lie in [0, T]");
      break;
    }
  }
  return errors;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig config = config_from_json_text(buffer.str());
  const std::vector<std::string> errors = validate_config(config);
  if (!errors.empty()) {
    std::string joined = "config invalid:";
    for (const std::string& err : errors) joined += "\n  " + err;
    throw ConfigError(joined);
  }
  return config;
}

std::string config_to_json_text(const ExperimentConfig& config) {
  json root;
  root["seed"] = config.seed;
  root["small_d"] = config.small_d;
  root["grid"] = {{"nx", config.grid.nx},
                  {"dt", config.grid.dt},
                  {"T", config.grid.T},
                  {"nu", config.grid.nu},
                  {"theta", config.grid.theta}};
  root["sigma"] = {{"family", sigma_family_name(config.sigma.family)},
                   {"C1", config.sigma.C1},
                   {"C2", config.sigma.C2},
                   {"D", config.sigma.D},
                   {"alpha", config.sigma.alpha},
                   {"M", config.sigma.M}};
  root["drift"] = {
      {"family",
       config.drift.family == DriftFamily::zero ? "zero" : "bounded_profile"},
      {"bound", config.drift.bound},
      {"profile", config.drift_profile_id}};
  root["event"] = {{"eps_sweep", config.event.eps_values},
                   {"h", config.event.h_id},
                   {"u0", config.event.u0_id}};
  root["mesh"] = {{"c0", config.mesh.c0},
                  {"theta", config.mesh.theta},
                  {"beta", config.mesh.beta}};
  root["estimator"] = {{"method", method_name(config.estimator.method)},
                       {"replicas", config.estimator.replicas},
                       {"particles", config.estimator.particles}};
  root["output"] = {{"dir", config.output.dir},
                    {"checkpoints", config.output.checkpoints},
                    {"format", config.output.format}};
  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = config_to_json_text(config);
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace spde
