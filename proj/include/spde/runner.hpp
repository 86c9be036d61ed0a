#pragma once

// Pipelines behind the CLI subcommands: estimate, persist (CSV + JSON +
// manifest), fit, and reshape for plotting. All tabular output is
// deterministic for a fixed (config, seed) regardless of worker count.

#include <optional>
#include <string>
#include <vector>

#include "spde/analysis.hpp"
#include "spde/config.hpp"
#include "spde/estimator.hpp"

namespace spde {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kEstimateCsvHeader =
    "eps,method,p_hat,log_p,se_log,replicas,seed";
inline constexpr const char* kTailCsvHeader =
    "lambda,p_hat,se,log_p,se_log,replicas,seed";

std::string format_double(double value);  // %.17g, round-trip exact

std::string estimates_csv(const std::vector<ProbabilityEstimate>& estimates);
std::string tail_csv(const TailCurve& curve);

// Parses an estimates CSV back into fit points (eps, log_p, se_log).
// Throws ConfigError naming any missing column.
std::vector<FitPoint> read_estimates_csv(const std::string& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<EstimateMethod> method;
  std::optional<std::vector<double>> eps_values;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> particles;
  std::optional<double> beta;
};

// CLI flags win over config values; the result is re-validated.
ExperimentConfig apply_overrides(ExperimentConfig config,
                                 const RunOverrides& overrides);

struct RunOutput {
  std::vector<std::string> files;
  std::string summary;
};

RunOutput run_simulate(const ExperimentConfig& config);
RunOutput run_smallball(const ExperimentConfig& config);

struct TailParams {
  double a = 1.0;
  double eps = 0.25;
  std::vector<double> lambdas;
  std::size_t k_box = 1;
};
RunOutput run_tail(const ExperimentConfig& config, const TailParams& params);

RunOutput run_couple(const ExperimentConfig& config);
RunOutput run_clip_check(const ExperimentConfig& config);
RunOutput run_girsanov_check(const ExperimentConfig& config, double g_bound);

// Reads an estimates CSV, fits the decay exponent, and checks it against the
// admissible window for the config's (alpha, beta).
RunOutput run_fit(const ExperimentConfig& config, const std::string& csv_path);

enum class PlotKind { smallball, tail, fit };
PlotKind parse_plot_kind(const std::string& name);
RunOutput emit_plotdata(const std::string& csv_path, PlotKind kind,
                        const std::string& out_path);

}  // namespace spde
