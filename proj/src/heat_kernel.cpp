#include "spde/heat_kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spde/errors.hpp"

namespace spde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCrossoverNuT = 0.05;

void check_params(const KernelParams& params) {
  if (!(params.nu > 0.0)) {
    throw std::domain_error("heat kernel requires nu > 0");
  }
  if (!(params.tol > 0.0)) {
    throw std::domain_error("heat kernel requires tol > 0");
  }
}

double line_gaussian(double z, double v) {
  // Whole-line kernel at variance v = 2 nu t.
  return std::exp(-z * z / (2.0 * v)) / std::sqrt(2.0 * kPi * v);
}

double neumann_image_sum(double t, double x, double y,
                         const KernelParams& params) {
  const double v = 2.0 * params.nu * t;
  double sum = 0.0;
  for (std::size_t n = 0;; ++n) {
    const double shift = 2.0 * static_cast<double>(n);
    double term = line_gaussian(x - y + shift, v) + line_gaussian(x + y + shift, v);
    if (n > 0) {
      term += line_gaussian(x - y - shift, v) + line_gaussian(x + y - shift, v);
    }
    sum += term;
    // Images at +-2n sit at least 2n - 2 away from any (x, y) in [0, 1]^2,
    // so once terms drop below tol the remainder is geometrically small.
    if (n > 0 && term < params.tol) return sum;
    if (n >= params.max_terms) {
      throw NumericalError("kernel_neumann: image sum did not converge");
    }
  }
}

double neumann_spectral(double t, double x, double y,
                        const KernelParams& params) {
  double sum = 1.0;
  for (std::size_t k = 1;; ++k) {
    const double kk = static_cast<double>(k);
    const double decay = std::exp(-params.nu * kk * kk * kPi * kPi * t);
    sum += 2.0 * decay * std::cos(kk * kPi * x) * std::cos(kk * kPi * y);
    if (2.0 * decay < params.tol) return sum;
    if (k >= params.max_terms) {
      throw NumericalError("kernel_neumann: spectral sum did not converge");
    }
  }
}

}  // namespace

double kernel_periodic(double t, double x, const KernelParams& params) {
  check_params(params);
  if (!(t > 0.0)) {
    throw std::domain_error("kernel_periodic requires t > 0");
  }
  const double v = 2.0 * params.nu * t;
  const double xf = x - std::floor(x);  // reduce to [0, 1)
  double sum = 0.0;
  for (std::size_t n = 0;; ++n) {
    const double shift = static_cast<double>(n);
    double term = line_gaussian(xf + shift, v);
    if (n > 0) term += line_gaussian(xf - shift, v);
    sum += term;
    if (n > 0 && term < params.tol) return sum;
    if (n >= params.max_terms) {
      throw NumericalError("kernel_periodic: image sum did not converge");
    }
  }
}

double kernel_neumann(double t, double x, double y,
                      const KernelParams& params) {
  check_params(params);
  if (!(t > 0.0)) {
    throw std::domain_error("kernel_neumann requires t > 0");
  }
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw std::domain_error("kernel_neumann requires x, y in [0, 1]");
  }
  switch (params.representation) {
    case KernelRepresentation::image_sum:
      return neumann_image_sum(t, x, y, params);
    case KernelRepresentation::spectral:
      return neumann_spectral(t, x, y, params);
    case KernelRepresentation::automatic:
      return params.nu * t <= kCrossoverNuT
                 ? neumann_image_sum(t, x, y, params)
                 : neumann_spectral(t, x, y, params);
  }
  throw std::invalid_argument("kernel_neumann: unknown representation");
}

double she_variance(double t, double x, const KernelParams& params) {
  check_params(params);
  if (!(t > 0.0)) {
    throw std::domain_error("she_variance requires t > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("she_variance requires x in [0, 1]");
  }
  // Split each mode (1 - e^{-2 nu k^2 pi^2 t}) / (2 nu k^2 pi^2) into its
  // stationary part and transient remainder. The stationary sum is
  //   sum_k (1 + cos(2 pi k x)) / (2 nu pi^2 k^2) = (1/3 - x + x^2) / (2 nu)
  // via sum cos(2 pi k x)/k^2 = pi^2 (x^2 - x + 1/6) on [0, 1].
  const double nu = params.nu;
  double total = t + (1.0 / 3.0 - x + x * x) / (2.0 * nu);
  const double rate = 2.0 * nu * kPi * kPi * t;
  for (std::size_t k = 1;; ++k) {
    const double kk = static_cast<double>(k);
    total -= (1.0 + std::cos(2.0 * kk * kPi * x)) *
             std::exp(-rate * kk * kk) / (2.0 * nu * kk * kk * kPi * kPi);
    // Remainder bound: sum_{j>k} 2 e^{-rate j^2} / (2 nu pi^2 j^2)
    //   <= e^{-rate (k+1)^2} / (nu pi^2 k)   via sum_{j>k} 1/j^2 <= 1/k.
    const double tail =
        std::exp(-rate * (kk + 1.0) * (kk + 1.0)) / (nu * kPi * kPi * kk);
    if (tail < params.tol * total) return total;
    if (k >= params.max_terms) {
      throw NumericalError("she_variance: series did not converge");
    }
  }
}

}  // namespace spde
