#pragma once

// JSON experiment configuration: strict parsing, hypothesis validation with
// per-path error messages, canonical round-trip serialization, and hashing.

#include <cstdint>
#include <string>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/estimator.hpp"
#include "spde/profiles.hpp"
#include "spde/solver.hpp"

namespace spde {

struct EventConfig {
  std::vector<double> eps_values;  // one entry for a single-radius event
  std::string h_id = "zero";
  std::string u0_id = "zero";  // "match_h" pins u0 to h at time 0
  ProfilePtr h;
  ProfilePtr u0;
};

struct EstimatorConfig {
  EstimateMethod method = EstimateMethod::direct;
  std::size_t replicas = 1000;
  std::size_t particles = 1000;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<double> checkpoints;
  std::string format = "csv";
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  GridSpec grid;
  SigmaSpec sigma;
  DriftSpec drift;
  std::string drift_profile_id = "zero";
  EventConfig event;
  MeshSpec mesh;  // mesh.eps is set per run from the event radius
  EstimatorConfig estimator;
  OutputConfig output;
  bool small_d = false;  // admits beta < 2 - alpha (small Holder constant)
};

// Strict structural parse: unknown keys, wrong types, and unknown family or
// profile names throw ConfigError naming the config path.
ExperimentConfig config_from_json_text(const std::string& text);

// Semantic checks (ellipticity order, alpha range, beta hypothesis, initial
// gap, replica counts); returns one message per violation, empty when valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

// Read + parse + validate; throws ConfigError joining all messages.
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: all keys present, sorted, normalized profile ids.
// Parsing the output and serializing again is byte-identical.
std::string config_to_json_text(const ExperimentConfig& config);

// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& config);

const char* method_name(EstimateMethod method);

}  // namespace spde
