#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spde/analysis.hpp"
#include "spde/config.hpp"
#include "spde/estimator.hpp"
#include "spde/heat_kernel.hpp"
#include "spde/measure_change.hpp"
#include "spde/profiles.hpp"
#include "spde/runner.hpp"
#include "spde/solver.hpp"

namespace py = pybind11;

namespace {

spde::SigmaSpec make_sigma(const std::string& family, double C1, double C2,
                           double D, double alpha, double M) {
  spde::SigmaSpec spec;
  if (family == "constant") {
    spec = spde::constant_sigma(C1);
  } else if (family == "holder_power") {
    spec = spde::holder_sigma(C1, C2, D, alpha, M);
  } else {
    throw spde::ConfigError("sigma.family: unknown family '" + family + "'");
  }
  spde::validate_sigma(spec);
  return spec;
}

spde::GridSpec make_grid(std::size_t nx, double dt, double T, double nu,
                         double theta) {
  spde::GridSpec grid;
  grid.nx = nx;
  grid.dt = dt;
  grid.T = T;
  grid.nu = nu;
  grid.theta = theta;
  spde::validate_grid(grid);
  return grid;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stochastic heat equation small-ball laboratory";

  py::register_exception<spde::ConfigError>(m, "ConfigError");
  py::register_exception<spde::NumericalError>(m, "NumericalError");

  m.def("kernel_neumann",
        [](double t, double x, double y, double nu) {
          spde::KernelParams params;
          params.nu = nu;
          return spde::kernel_neumann(t, x, y, params);
        },
        py::arg("t"), py::arg("x"), py::arg("y"), py::arg("nu") = 0.5);

  m.def("she_variance",
        [](double t, double x, double nu) {
          spde::KernelParams params;
          params.nu = nu;
          return spde::she_variance(t, x, params);
        },
        py::arg("t"), py::arg("x"), py::arg("nu") = 0.5);

  m.def("brownian_oracle",
        [](double t, double eps) {
          return spde::brownian_oracle(t, eps, 64).value;
        },
        py::arg("t"), py::arg("eps"));

  m.def(
      "simulate",
      [](std::size_t nx, double dt, double T, double nu, double theta,
         const std::string& sigma_family, double C1, double C2, double D,
         double alpha, double M, std::uint64_t seed, std::uint64_t replica) {
        const spde::GridSpec grid = make_grid(nx, dt, T, nu, theta);
        const spde::SigmaSpec sigma =
            make_sigma(sigma_family, C1, C2, D, alpha, M);
        spde::StreamHandle stream =
            spde::derive_stream(spde::MasterSeed{seed}, replica);
        spde::SolveOptions options;
        spde::Field field = spde::constant_field(grid, 0.0);
        options.checkpoints = {T};
        const spde::TrajectorySummary run = spde::solve(
            field, sigma, spde::zero_drift(), grid, stream, options);
        return py::make_tuple(run.sup_dev, run.checkpoints.back().values);
      },
      py::arg("nx") = 64, py::arg("dt") = 1e-4, py::arg("T") = 0.01,
      py::arg("nu") = 0.5, py::arg("theta") = 0.5,
      py::arg("sigma_family") = "constant", py::arg("C1") = 1.0,
      py::arg("C2") = 1.0, py::arg("D") = 0.0, py::arg("alpha") = 1.0,
      py::arg("M") = 10.0, py::arg("seed") = 0, py::arg("replica") = 0,
      "One driven trajectory; returns (sup |u|, final field values)");

  m.def(
      "small_ball",
      [](double eps, std::size_t nx, double dt, double T, double nu,
         const std::string& sigma_family, double C1, double C2, double D,
         double alpha, double M, std::size_t replicas, std::uint64_t seed) {
        const spde::GridSpec grid = make_grid(nx, dt, T, nu, 0.5);
        const spde::SigmaSpec sigma =
            make_sigma(sigma_family, C1, C2, D, alpha, M);
        spde::BallEvent event;
        event.eps = eps;
        event.T = T;
        const spde::ProbabilityEstimate est =
            spde::direct_mc(event, sigma, spde::zero_drift(), grid, replicas,
                            spde::MasterSeed{seed});
        py::dict out;
        out["eps"] = est.eps;
        out["p_hat"] = est.p_hat;
        out["log_p"] = est.log_p;
        out["se_log"] = est.se_log;
        out["ci_lo"] = est.ci_lo;
        out["ci_hi"] = est.ci_hi;
        out["replicas"] = est.replicas;
        return out;
      },
      py::arg("eps"), py::arg("nx") = 64, py::arg("dt") = 1e-4,
      py::arg("T") = 0.01, py::arg("nu") = 0.5,
      py::arg("sigma_family") = "constant", py::arg("C1") = 1.0,
      py::arg("C2") = 1.0, py::arg("D") = 0.0, py::arg("alpha") = 1.0,
      py::arg("M") = 10.0, py::arg("replicas") = 1000, py::arg("seed") = 0,
      "Direct Monte Carlo estimate of P(sup |u| <= eps on [0, T])");

  m.def("fit_exponent",
        [](const std::vector<std::tuple<double, double, double>>& rows) {
          std::vector<spde::FitPoint> points;
          for (const auto& [eps, log_p, se_log] : rows) {
            points.push_back({eps, log_p, se_log});
          }
          const spde::ExponentFit fit = spde::fit_exponent(points);
          py::dict out;
          out["exponent"] = fit.exponent;
          out["std_err"] = fit.std_err;
          out["log_prefactor"] = fit.log_prefactor;
          out["r_squared"] = fit.r_squared;
          out["points_used"] = fit.points_used;
          return out;
        },
        py::arg("rows"),
        "Weighted fit of log(-log p) on log(1/eps); rows of "
        "(eps, log_p, se_log)");

  m.def("validate_config_text", [](const std::string& text) {
    return spde::validate_config(spde::config_from_json_text(text));
  });

  m.attr("__version__") = spde::kVersion;
}
