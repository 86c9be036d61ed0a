#include "spde/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "spde/errors.hpp"
#include "spde/measure_change.hpp"

namespace spde {

namespace {

using nlohmann::json;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("input: cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Hypotheses of the underlying bounds that cannot be checked from a config:
// listed in every manifest rather than silently assumed.
const std::vector<std::string>& unenforced_hypotheses() {
  static const std::vector<std::string> notes = {
      "sigma ellipticity and Holder modulus hold only on the sampled "
      "certificate grid, not for all arguments",
      "decay constants are existence constants; fits estimate them but no "
      "numeric value is asserted",
      "continuum noise regularity is represented by its grid discretization",
  };
  return notes;
}

std::string manifest_json(const ExperimentConfig& config, double wall_seconds,
                          const std::vector<std::string>& files) {
  json root;
  root["version"] = kVersion;
  root["seed"] = config.seed;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  root["config_hash"] = hash;
  root["wall_seconds"] = wall_seconds;
  root["files"] = files;
  root["unenforced_hypotheses"] = unenforced_hypotheses();
  root["config"] = json::parse(config_to_json_text(config));
  return root.dump(2) + "\n";
}

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// Finishes a pipeline: writes the manifest next to the result files.
void finish(RunOutput& output, const ExperimentConfig& config,
            const std::string& dir, const Stopwatch& watch) {
  const std::string path = join_path(dir, "manifest.json");
  write_file(path, manifest_json(config, watch.seconds(), output.files));
  output.files.push_back(path);
}

BallEvent event_at(const ExperimentConfig& config, double eps) {
  BallEvent event;
  event.eps = eps;
  event.T = config.grid.T;
  event.h = config.event.h;
  event.u0 = config.event.u0;
  return event;
}

double first_eps(const ExperimentConfig& config) {
  if (config.event.eps_values.empty()) {
    throw ConfigError("event: needs eps or a nonempty eps_sweep");
  }
  return config.event.eps_values.front();
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw ConfigError("csv: missing column '" + name + "'");
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
    if (table.rows.back().size() != table.columns.size()) {
      throw ConfigError("csv: row " + std::to_string(table.rows.size()) +
                        " of '" + path + "' has " +
                        std::to_string(table.rows.back().size()) +
                        " fields, expected " +
                        std::to_string(table.columns.size()));
    }
  }
  return table;
}

double parse_double(const std::string& text) {
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw ConfigError("csv: cannot parse number '" + text + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string estimates_csv(const std::vector<ProbabilityEstimate>& estimates) {
  std::string out = kEstimateCsvHeader;
  out += '\n';
  for (const ProbabilityEstimate& est : estimates) {
    out += format_double(est.eps);
    out += ',';
    out += method_name(est.method);
    out += ',';
    out += format_double(est.p_hat);
    out += ',';
    out += format_double(est.log_p);
    out += ',';
    out += format_double(est.se_log);
    out += ',';
    out += std::to_string(est.replicas);
    out += ',';
    out += std::to_string(est.seed);
    out += '\n';
  }
  return out;
}

std::string tail_csv(const TailCurve& curve) {
  std::string out = kTailCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i) {
    const double p = curve.probs[i];
    out += format_double(curve.lambdas[i]);
    out += ',';
    out += format_double(p);
    out += ',';
    out += format_double(curve.se[i]);
    out += ',';
    out += format_double(p > 0.0 ? std::log(p)
                                 : -std::numeric_limits<double>::infinity());
    out += ',';
    out += format_double(curve.se_log[i]);
    out += ',';
    out += std::to_string(curve.replicas);
    out += ",0\n";
  }
  return out;
}

std::vector<FitPoint> read_estimates_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_eps = table.column("eps");
  const std::size_t c_log = table.column("log_p");
  const std::size_t c_se = table.column("se_log");
  std::vector<FitPoint> points;
  for (const auto& row : table.rows) {
    FitPoint pt;
    pt.eps = parse_double(row[c_eps]);
    pt.log_p = parse_double(row[c_log]);
    pt.se_log = parse_double(row[c_se]);
    points.push_back(pt);
  }
  return points;
}

ExperimentConfig apply_overrides(ExperimentConfig config,
                                 const RunOverrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.out_dir) config.output.dir = *overrides.out_dir;
  if (overrides.method) config.estimator.method = *overrides.method;
  if (overrides.eps_values) config.event.eps_values = *overrides.eps_values;
  if (overrides.replicas) config.estimator.replicas = *overrides.replicas;
  if (overrides.particles) config.estimator.particles = *overrides.particles;
  if (overrides.beta) config.mesh.beta = *overrides.beta;
  const std::vector<std::string> errors = validate_config(config);
  if (!errors.empty()) {
    std::string joined = "config invalid:";
    for (const std::string& err : errors) joined += "\n  " + err;
    throw ConfigError(joined);
  }
  return config;
}

RunOutput run_simulate(const ExperimentConfig& config) {
  Stopwatch watch;
  RunOutput output;
  const double eps = config.event.eps_values.empty()
                         ? std::numeric_limits<double>::infinity()
                         : first_eps(config);

  StreamHandle stream = derive_stream(MasterSeed{config.seed}, 0);
  SolveOptions options;
  options.h = config.event.h;
  options.checkpoints = config.output.checkpoints.empty()
                            ? std::vector<double>{config.grid.T}
                            : config.output.checkpoints;
  const Field u0 = config.event.u0
                       ? make_field(config.grid, *config.event.u0)
                       : constant_field(config.grid, 0.0);
  const TrajectorySummary run =
      solve(u0, config.sigma, config.drift, config.grid, stream, options);

  std::string csv = "t,x,u\n";
  const double dx = config.grid.dx();
  for (const Field& field : run.checkpoints) {
    for (std::size_t j = 0; j < field.values.size(); ++j) {
      csv += format_double(field.time);
      csv += ',';
      csv += format_double(dx * static_cast<double>(j));
      csv += ',';
      csv += format_double(field.values[j]);
      csv += '\n';
    }
  }
  const std::string path = join_path(config.output.dir, "trajectory.csv");
  write_file(path, csv);
  output.files.push_back(path);
  output.summary = "simulate: sup deviation " + format_double(run.sup_dev) +
                   (run.sup_dev <= eps ? " (inside tube)" : " (outside tube)") +
                   ", " + std::to_string(run.checkpoints.size()) +
                   " checkpoints -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_smallball(const ExperimentConfig& config) {
  Stopwatch watch;
  RunOutput output;
  const MasterSeed master{config.seed};
  std::vector<ProbabilityEstimate> estimates;
  if (config.estimator.method == EstimateMethod::splitting) {
    BallEvent event = event_at(config, first_eps(config));
    MeshSpec mesh = config.mesh;
    mesh.eps = event.eps;
    estimates.push_back(splitting_mc(event, config.sigma, config.drift,
                                     config.grid, mesh,
                                     config.estimator.particles, master));
  } else if (config.event.eps_values.size() == 1) {
    estimates.push_back(direct_mc(event_at(config, first_eps(config)),
                                  config.sigma, config.drift, config.grid,
                                  config.estimator.replicas, master));
  } else {
    estimates = direct_mc_sweep(event_at(config, first_eps(config)),
                                config.event.eps_values, config.sigma,
                                config.drift, config.grid,
                                config.estimator.replicas, master);
  }
  const std::string path = join_path(config.output.dir, "results.csv");
  write_file(path, estimates_csv(estimates));
  output.files.push_back(path);
  std::string probs;
  for (const ProbabilityEstimate& est : estimates) {
    if (!probs.empty()) probs += ", ";
    probs += "p(" + format_double(est.eps) + ") = " + format_double(est.p_hat);
  }
  output.summary = "smallball: " + probs + " -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_tail(const ExperimentConfig& config, const TailParams& params) {
  Stopwatch watch;
  RunOutput output;
  std::vector<double> lambdas = params.lambdas;
  if (lambdas.empty()) {
    for (double l = 0.5; l <= 3.01; l += 0.25) lambdas.push_back(l);
  }
  const TailCurve curve =
      tail_curve(params.a, params.eps, lambdas, config.sigma, config.grid,
                 config.estimator.replicas, MasterSeed{config.seed},
                 params.k_box);
  const std::string path = join_path(config.output.dir, "tail.csv");
  write_file(path, tail_csv(curve));
  output.files.push_back(path);
  output.summary = "tail: " + std::to_string(curve.lambdas.size()) +
                   " lambda points at eps = " + format_double(params.eps) +
                   ", a = " + format_double(params.a) + " -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_couple(const ExperimentConfig& config) {
  Stopwatch watch;
  RunOutput output;
  MeshSpec mesh = config.mesh;
  mesh.eps = first_eps(config);
  const CouplingStats stats =
      coupling_diagnostic(config.sigma, mesh, config.grid,
                          config.estimator.replicas, MasterSeed{config.seed});
  json root;
  root["horizon"] = stats.horizon;
  root["replicas"] = stats.replicas;
  root["median"] = stats.median;
  root["q10"] = stats.q10;
  root["q25"] = stats.q25;
  root["q75"] = stats.q75;
  root["q90"] = stats.q90;
  root["max"] = stats.max;
  root["eps_over_6"] = mesh.eps / 6.0;
  root["fraction_small"] = stats.fraction_small;
  root["fraction_ci"] = {stats.fraction_ci_lo, stats.fraction_ci_hi};
  const std::string path = join_path(config.output.dir, "couple.json");
  write_file(path, root.dump(2) + "\n");
  output.files.push_back(path);
  output.summary = "couple: median gap " + format_double(stats.median) +
                   ", max " + format_double(stats.max) + " over [0, " +
                   format_double(stats.horizon) + "] -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_clip_check(const ExperimentConfig& config) {
  Stopwatch watch;
  RunOutput output;
  const double eps = first_eps(config);
  std::size_t agreeing = 0;
  std::optional<double> divergence;
  const std::size_t replicas = config.estimator.replicas;
  for (std::size_t i = 0; i < replicas; ++i) {
    StreamHandle stream = derive_stream(MasterSeed{config.seed}, i);
    const ClipReport report =
        clipped_agreement(config.sigma, eps, config.grid, stream);
    if (report.agree) {
      ++agreeing;
    } else if (!divergence) {
      divergence = report.first_divergence;
    }
  }
  json root;
  root["eps"] = eps;
  root["replicas"] = replicas;
  root["agreeing"] = agreeing;
  root["all_agree"] = agreeing == replicas;
  if (divergence) root["first_divergence"] = *divergence;
  const std::string path = join_path(config.output.dir, "clip.json");
  write_file(path, root.dump(2) + "\n");
  output.files.push_back(path);
  output.summary = "clip-check: " + std::to_string(agreeing) + "/" +
                   std::to_string(replicas) +
                   " replicas agree up to exit -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_girsanov_check(const ExperimentConfig& config, double g_bound) {
  Stopwatch watch;
  RunOutput output;
  if (!(g_bound > 0.0)) {
    throw ConfigError("girsanov-check: --g-bound must be > 0");
  }
  const DriftSpec g = bounded_drift(g_bound, constant_profile(g_bound));
  const CsExperiment exp =
      cs_experiment(config.sigma, g, config.grid, first_eps(config),
                    config.estimator.replicas, MasterSeed{config.seed});
  json root;
  root["g_bound"] = g_bound;
  root["eps"] = first_eps(config);
  root["replicas"] = config.estimator.replicas;
  root["mean_density"] = exp.mean_density;
  root["se_density"] = exp.se_density;
  root["p_hat"] = exp.p_hat;
  root["se_p"] = exp.se_p;
  root["q_hat"] = exp.q_hat;
  root["se_q"] = exp.se_q;
  root["second_moment_root"] = exp.m_hat;
  root["se_second_moment_root"] = exp.se_m;
  root["cs_bound"] = exp.verdict.bound;
  root["cs_margin"] = exp.verdict.margin;
  root["cs_holds"] = exp.verdict.holds;
  const std::string path = join_path(config.output.dir, "girsanov.json");
  write_file(path, root.dump(2) + "\n");
  output.files.push_back(path);
  output.summary =
      "girsanov-check: mean density " + format_double(exp.mean_density) +
      " +- " + format_double(exp.se_density) + ", cauchy-schwarz " +
      (exp.verdict.holds ? "holds" : "violated") + " -> " + path;
  finish(output, config, config.output.dir, watch);
  return output;
}

RunOutput run_fit(const ExperimentConfig& config, const std::string& csv_path) {
  Stopwatch watch;
  RunOutput output;
  const std::vector<FitPoint> points = read_estimates_csv(csv_path);
  const ExponentFit fit = fit_exponent(points);

  json root;
  root["exponent"] = fit.exponent;
  root["std_err"] = fit.std_err;
  root["log_prefactor"] = fit.log_prefactor;
  root["r_squared"] = fit.r_squared;
  root["eps_min"] = fit.eps_min;
  root["eps_max"] = fit.eps_max;
  root["points_used"] = fit.points_used;
  root["points_excluded"] = fit.points_excluded;

  std::string verdict_text = "skipped (beta < 2 - alpha, small_d regime)";
  if (config.mesh.beta >= 2.0 - config.sigma.alpha - 1e-12) {
    const WindowCheck check =
        bound_window_check(fit, config.sigma.alpha, config.mesh.beta);
    root["window"] = {{"lo", check.lo},
                      {"hi", check.hi},
                      {"verdict", window_verdict_name(check.verdict)},
                      {"margin", check.margin}};
    verdict_text = std::string(window_verdict_name(check.verdict)) +
                   " window [" + format_double(check.lo) + ", " +
                   format_double(check.hi) + "]";
  } else {
    root["window"] = "skipped: beta < 2 - alpha (small_d regime)";
  }

  const std::string report_path = join_path(config.output.dir, "fit.json");
  write_file(report_path, root.dump(2) + "\n");
  output.files.push_back(report_path);

  std::string fitted = "eps,log_p,fitted\n";
  const double C = std::exp(fit.log_prefactor);
  for (const FitPoint& pt : points) {
    if (!(pt.eps > 0.0) || !std::isfinite(pt.log_p) || pt.log_p >= 0.0) {
      continue;
    }
    const double model = -C * std::pow(pt.eps, -fit.exponent);
    fitted += format_double(pt.eps);
    fitted += ',';
    fitted += format_double(pt.log_p);
    fitted += ',';
    fitted += format_double(model);
    fitted += '\n';
  }
  const std::string fitted_path = join_path(config.output.dir, "fitted.csv");
  write_file(fitted_path, fitted);
  output.files.push_back(fitted_path);

  output.summary = "fit: exponent " + format_double(fit.exponent) + " +- " +
                   format_double(fit.std_err) + ", " + verdict_text + " -> " +
                   report_path;
  finish(output, config, config.output.dir, watch);
  return output;
}

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "smallball") return PlotKind::smallball;
  if (name == "tail") return PlotKind::tail;
  if (name == "fit") return PlotKind::fit;
  throw ConfigError("plotdata: unknown kind '" + name + "'");
}

RunOutput emit_plotdata(const std::string& csv_path, PlotKind kind,
                        const std::string& out_path) {
  const CsvTable table = read_csv(csv_path);
  std::string out;
  if (kind == PlotKind::smallball) {
    const std::size_t c_eps = table.column("eps");
    const std::size_t c_log = table.column("log_p");
    const std::size_t c_se = table.column("se_log");
    out = "log_inv_eps,loglog_p,ci_lo,ci_hi\n";
    for (const auto& row : table.rows) {
      const double eps = parse_double(row[c_eps]);
      const double log_p = parse_double(row[c_log]);
      const double se_log = parse_double(row[c_se]);
      if (!(eps > 0.0) || !std::isfinite(log_p) || log_p >= 0.0) continue;
      const double y = std::log(-log_p);
      const double se_y = std::isfinite(se_log) ? se_log / -log_p : 0.0;
      out += format_double(-std::log(eps)) + ',' + format_double(y) + ',' +
             format_double(y - 2.0 * se_y) + ',' +
             format_double(y + 2.0 * se_y) + '\n';
    }
  } else if (kind == PlotKind::tail) {
    const std::size_t c_lambda = table.column("lambda");
    const std::size_t c_log = table.column("log_p");
    const std::size_t c_se = table.column("se_log");
    out = "lambda_sq,log_p,ci_lo,ci_hi\n";
    for (const auto& row : table.rows) {
      const double lambda = parse_double(row[c_lambda]);
      const double log_p = parse_double(row[c_log]);
      const double se_log = parse_double(row[c_se]);
      if (!std::isfinite(log_p)) continue;
      const double se = std::isfinite(se_log) ? se_log : 0.0;
      out += format_double(lambda * lambda) + ',' + format_double(log_p) +
             ',' + format_double(log_p - 2.0 * se) + ',' +
             format_double(log_p + 2.0 * se) + '\n';
    }
  } else {
    const std::size_t c_eps = table.column("eps");
    const std::size_t c_log = table.column("log_p");
    const std::size_t c_fit = table.column("fitted");
    out = "log_inv_eps,loglog_p,fitted\n";
    for (const auto& row : table.rows) {
      const double eps = parse_double(row[c_eps]);
      const double log_p = parse_double(row[c_log]);
      const double fitted = parse_double(row[c_fit]);
      if (!(eps > 0.0) || log_p >= 0.0 || fitted >= 0.0) continue;
      out += format_double(-std::log(eps)) + ',' +
             format_double(std::log(-log_p)) + ',' +
             format_double(std::log(-fitted)) + '\n';
    }
  }
  write_file(out_path, out);
  RunOutput output;
  output.files.push_back(out_path);
  output.summary = "plotdata: " + std::to_string(table.rows.size()) +
                   " input rows -> " + out_path;
  return output;
}

}  // namespace spde
