#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/errors.hpp"

using namespace spde;

namespace {

const char* kValidText = R"({
  "seed": 42,
  "grid": {"nx": 32, "dt": 0.001, "T": 0.01, "nu": 0.5, "theta": 0.5},
  "sigma": {"family": "holder_power", "C1": 1.0, "C2": 2.0, "D": 0.5, "alpha": 0.8, "M": 10.0},
  "drift": {"family": "bounded_profile", "bound": 0.3, "profile": "sine_cos:0.3"},
  "event": {"eps": 0.5, "h": "sine_cos:0.1", "u0": "match_h"},
  "mesh": {"c0": 0.1, "theta": 4.0, "beta": 1.3},
  "estimator": {"method": "direct", "replicas": 100, "particles": 64},
  "output": {"dir": "out", "checkpoints": [0.01], "format": "csv"}
})";

bool has_error(const std::vector<std::string>& errors,
               const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) {
                       return e.find(needle) != std::string::npos;
                     });
}

}  // namespace

TEST_CASE("valid config parses and validates") {
  const ExperimentConfig config = config_from_json_text(kValidText);
  CHECK(config.seed == 42);
  CHECK(config.grid.nx == 32);
  CHECK(config.sigma.family == SigmaFamily::holder_power);
  CHECK(config.sigma.alpha == 0.8);
  CHECK(config.drift.family == DriftFamily::bounded_profile);
  CHECK(config.drift_profile_id == "sine_cos:0.3");
  REQUIRE(config.event.eps_values.size() == 1);
  CHECK(config.event.eps_values[0] == 0.5);
  CHECK(config.event.h_id == "sine_cos:0.1");
  CHECK(config.event.u0_id == "match_h");
  CHECK(config.mesh.beta == 1.3);
  CHECK(config.estimator.replicas == 100);
  CHECK(validate_config(config).empty());
}

TEST_CASE("matched start pins the initial profile to the reference path") {
  const ExperimentConfig config = config_from_json_text(kValidText);
  REQUIRE(config.event.u0);
  REQUIRE(config.event.h);
  for (double x : {0.0, 0.25, 0.7, 1.0}) {
    CHECK(config.event.u0->eval(0.0, x) ==
          doctest::Approx(config.event.h->eval(0.0, x)));
    // u0 is frozen at time zero, so later times change nothing.
    CHECK(config.event.u0->eval(5.0, x) ==
          doctest::Approx(config.event.h->eval(0.0, x)));
  }
}

TEST_CASE("unknown keys and wrong types are rejected") {
  CHECK_THROWS_AS(config_from_json_text(R"({"sneed": 1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"grid": {"nx": 32, "dz": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"grid": {"nx": "many"}})"),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"sigma": {"family": "cubic"}})"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json_text(R"({"drift": {"family": "shift_induced"}})"),
      ConfigError);
  CHECK_THROWS_AS(
      config_from_json_text(R"({"event": {"h": "wavelet:3"}})"),
      ConfigError);
}

TEST_CASE("eps and eps_sweep are mutually exclusive") {
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"event": {"eps": 0.5, "eps_sweep": [0.5, 0.4]}})"),
      ConfigError);
  const ExperimentConfig sweep = config_from_json_text(
      R"({"event": {"eps_sweep": [0.5, 0.4, 0.3]}})");
  CHECK(sweep.event.eps_values == std::vector<double>{0.5, 0.4, 0.3});
}

TEST_CASE("validation reports inverted ellipticity bounds") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.sigma.C1 = 3.0;
  const std::vector<std::string> errors = validate_config(config);
  CHECK(has_error(errors, "ellipticity bounds inverted"));
}

TEST_CASE("validation enforces the beta hypothesis unless small_d is set") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.mesh.beta = 1.1;  // below 2 - alpha = 1.2
  CHECK(has_error(validate_config(config), "beta < 2 - alpha"));
  config.small_d = true;
  CHECK(validate_config(config).empty());
  config.small_d = false;
  config.mesh.beta = 1.2;  // equality is admissible
  CHECK(validate_config(config).empty());
}

TEST_CASE("validation aggregates independent errors") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.grid.nx = 2;
  config.sigma.alpha = 1.5;
  config.estimator.replicas = 0;
  config.output.format = "parquet";
  const std::vector<std::string> errors = validate_config(config);
  CHECK(errors.size() >= 4);
  CHECK(has_error(errors, "grid.nx"));
  CHECK(has_error(errors, "sigma.alpha"));
  CHECK(has_error(errors, "estimator.replicas"));
  CHECK(has_error(errors, "output.format"));
}

TEST_CASE("validation checks the initial gap against the smallest radius") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.event.u0_id = "constant:0.4";
  config.event.u0 = parse_profile("constant:0.4");
  config.event.h_id = "zero";
  config.event.h = parse_profile("zero");
  config.event.eps_values = {0.5};
  CHECK(has_error(validate_config(config), "initial gap"));
  config.event.eps_values = {0.9};
  CHECK(validate_config(config).empty());
}

TEST_CASE("splitting configs need a single radius and sane particles") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.estimator.method = EstimateMethod::splitting;
  config.event.eps_values = {0.5, 0.4};
  CHECK(has_error(validate_config(config), "single eps"));
  config.event.eps_values = {0.5};
  config.estimator.particles = 1;
  CHECK(has_error(validate_config(config), "particles"));
}

TEST_CASE("checkpoints must stay inside the horizon") {
  ExperimentConfig config = config_from_json_text(kValidText);
  config.output.checkpoints = {config.grid.T * 2.0};
  CHECK(has_error(validate_config(config), "checkpoints"));
}

TEST_CASE("canonical serialization round-trips byte for byte") {
  const ExperimentConfig config = config_from_json_text(kValidText);
  const std::string canonical = config_to_json_text(config);
  const ExperimentConfig reparsed = config_from_json_text(canonical);
  CHECK(config_to_json_text(reparsed) == canonical);
  CHECK(config_hash(reparsed) == config_hash(config));
  // The canonical form always carries the radii as a sweep array.
  CHECK(canonical.find("eps_sweep") != std::string::npos);
}

TEST_CASE("hash tracks content changes") {
  const ExperimentConfig config = config_from_json_text(kValidText);
  ExperimentConfig other = config;
  other.seed = 43;
  CHECK(config_hash(config) != config_hash(other));
  CHECK(config_hash(config) == config_hash(config_from_json_text(kValidText)));
}

TEST_CASE("defaults survive an empty document") {
  const ExperimentConfig config = config_from_json_text("{}");
  CHECK(config.seed == 0);
  CHECK(config.grid.nx == 128);
  CHECK(config.sigma.family == SigmaFamily::constant);
  CHECK(config.event.h_id == "zero");
  CHECK(config.estimator.method == EstimateMethod::direct);
  CHECK(config.output.format == "csv");
  // No radius configured: validation, not parsing, reports it.
  CHECK(has_error(validate_config(config), "event"));
}

TEST_CASE("load_config surfaces file and validation failures") {
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}
