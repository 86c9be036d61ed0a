#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spde/config.hpp"
#include "spde/errors.hpp"
#include "spde/runner.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

spde::ExperimentConfig load_with_overrides(const CommonFlags& common,
                                           spde::RunOverrides overrides) {
  if (common.config_path.empty()) {
    throw spde::ConfigError("--config is required");
  }
  overrides.seed = common.seed;
  overrides.out_dir = common.out_dir;
  return spde::apply_overrides(spde::load_config(common.config_path),
                               overrides);
}

int run_validate(const CommonFlags& common) {
  if (common.config_path.empty()) {
    throw spde::ConfigError("--config is required");
  }
  std::ifstream in(common.config_path);
  if (!in) {
    throw spde::ConfigError("config: cannot read '" + common.config_path +
                            "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const spde::ExperimentConfig config =
      spde::config_from_json_text(buffer.str());
  const std::vector<std::string> errors = spde::validate_config(config);
  if (!errors.empty()) {
    for (const std::string& err : errors) {
      std::cerr << "error: " << err << "\n";
    }
    return 2;
  }
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(spde::config_hash(config)));
  std::cout << "config valid (hash " << hash << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic heat equation small-ball laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  std::uint64_t seed_value = 0;
  std::string out_value;
  app.add_option("--config", common.config_path, "experiment config (JSON)");
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the config seed");
  auto* out_opt =
      app.add_option("--out", out_value, "override the output directory");

  std::string method = "direct";
  double eps = 0.0;
  std::vector<double> eps_sweep;
  std::size_t replicas = 0;
  std::size_t particles = 0;
  double beta = 0.0;
  double tail_a = 1.0;
  double tail_eps = 0.25;
  std::size_t tail_k_box = 1;
  std::vector<double> lambda_list;
  double g_bound = 0.3;
  std::string csv_path;
  std::string plot_kind = "smallball";

  auto* simulate = app.add_subcommand("simulate", "one trajectory to CSV");

  auto* smallball =
      app.add_subcommand("smallball", "ball probability estimates");
  auto* method_opt = smallball->add_option(
      "--method", method, "direct or splitting")->check(
      CLI::IsMember({"direct", "splitting"}));
  auto* eps_opt = smallball->add_option("--eps", eps, "single radius");
  auto* sweep_opt =
      smallball->add_option("--eps-sweep", eps_sweep, "radius sweep");
  eps_opt->excludes(sweep_opt);
  auto* replicas_opt =
      smallball->add_option("--replicas", replicas, "direct replicas");
  auto* particles_opt =
      smallball->add_option("--particles", particles, "splitting particles");
  auto* beta_opt =
      smallball->add_option("--beta", beta, "stage-mesh stretching exponent");

  auto* tail = app.add_subcommand("tail", "noise supremum tail curve");
  tail->add_option("--a", tail_a, "box horizon in units of eps^4");
  tail->add_option("--eps", tail_eps, "parabolic box scale");
  tail->add_option("--lambda-list", lambda_list, "thresholds in units of eps");
  tail->add_option("--k-box", tail_k_box, "spatial box index");
  auto* tail_replicas =
      tail->add_option("--replicas", replicas, "Monte Carlo replicas");

  auto* couple =
      app.add_subcommand("couple", "frozen-coefficient coupling gap");
  auto* couple_eps = couple->add_option("--eps", eps, "stage radius");
  auto* couple_replicas =
      couple->add_option("--replicas", replicas, "Monte Carlo replicas");
  auto* couple_beta =
      couple->add_option("--beta", beta, "stage-mesh stretching exponent");

  auto* clip = app.add_subcommand(
      "clip-check", "pathwise agreement of clipped coefficients");
  auto* clip_eps = clip->add_option("--eps", eps, "clip radius");
  auto* clip_replicas =
      clip->add_option("--replicas", replicas, "trajectories to compare");

  auto* girsanov = app.add_subcommand(
      "girsanov-check", "drift-removal density diagnostics");
  girsanov->add_option("--g-bound", g_bound, "constant drift level");
  auto* girsanov_eps = girsanov->add_option("--eps", eps, "ball radius");
  auto* girsanov_replicas =
      girsanov->add_option("--replicas", replicas, "Monte Carlo replicas");

  auto* fit = app.add_subcommand("fit", "decay exponent fit of a results CSV");
  fit->add_option("--csv", csv_path, "estimates CSV (default results.csv)");
  auto* fit_beta =
      fit->add_option("--beta", beta, "stage-mesh stretching exponent");

  auto* plotdata =
      app.add_subcommand("plotdata", "reshape a results CSV for plotting");
  plotdata->add_option("--csv", csv_path, "input CSV")->required();
  plotdata->add_option("--kind", plot_kind, "smallball, tail, or fit")
      ->check(CLI::IsMember({"smallball", "tail", "fit"}));

  auto* validate = app.add_subcommand("validate", "check a config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (seed_opt->count()) common.seed = seed_value;
  if (out_opt->count()) common.out_dir = out_value;

  try {
    if (validate->parsed()) return run_validate(common);

    if (plotdata->parsed()) {
      const std::string out_dir =
          common.out_dir
              ? *common.out_dir
              : std::filesystem::path(csv_path).parent_path().string();
      const std::string out_path =
          (std::filesystem::path(out_dir.empty() ? "." : out_dir) /
           ("plot_" + plot_kind + ".csv"))
              .string();
      const spde::RunOutput out = spde::emit_plotdata(
          csv_path, spde::parse_plot_kind(plot_kind), out_path);
      std::cout << out.summary << "\n";
      return 0;
    }

    spde::RunOverrides overrides;
    if (smallball->parsed()) {
      if (method_opt->count()) {
        overrides.method = method == "splitting"
                               ? spde::EstimateMethod::splitting
                               : spde::EstimateMethod::direct;
      }
      if (eps_opt->count()) overrides.eps_values = std::vector<double>{eps};
      if (sweep_opt->count()) overrides.eps_values = eps_sweep;
      if (replicas_opt->count()) overrides.replicas = replicas;
      if (particles_opt->count()) overrides.particles = particles;
      if (beta_opt->count()) overrides.beta = beta;
    } else if (tail->parsed()) {
      if (tail_replicas->count()) overrides.replicas = replicas;
    } else if (couple->parsed()) {
      if (couple_eps->count()) overrides.eps_values = std::vector<double>{eps};
      if (couple_replicas->count()) overrides.replicas = replicas;
      if (couple_beta->count()) overrides.beta = beta;
    } else if (clip->parsed()) {
      if (clip_eps->count()) overrides.eps_values = std::vector<double>{eps};
      if (clip_replicas->count()) overrides.replicas = replicas;
    } else if (girsanov->parsed()) {
      if (girsanov_eps->count()) {
        overrides.eps_values = std::vector<double>{eps};
      }
      if (girsanov_replicas->count()) overrides.replicas = replicas;
    } else if (fit->parsed()) {
      if (fit_beta->count()) overrides.beta = beta;
    }

    const spde::ExperimentConfig config =
        load_with_overrides(common, overrides);

    spde::RunOutput out;
    if (simulate->parsed()) {
      out = spde::run_simulate(config);
    } else if (smallball->parsed()) {
      out = spde::run_smallball(config);
    } else if (tail->parsed()) {
      spde::TailParams params;
      params.a = tail_a;
      params.eps = tail_eps;
      params.lambdas = lambda_list;
      params.k_box = tail_k_box;
      out = spde::run_tail(config, params);
    } else if (couple->parsed()) {
      out = spde::run_couple(config);
    } else if (clip->parsed()) {
      out = spde::run_clip_check(config);
    } else if (girsanov->parsed()) {
      out = spde::run_girsanov_check(config, g_bound);
    } else if (fit->parsed()) {
      const std::string path =
          csv_path.empty()
              ? (std::filesystem::path(config.output.dir) / "results.csv")
                    .string()
              : csv_path;
      out = spde::run_fit(config, path);
    }
    std::cout << out.summary << "\n";
    return 0;
  } catch (const spde::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const spde::NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "unexpected error: " << err.what() << "\n";
    return 3;
  }
}
