#pragma once

// Gauss-Legendre quadrature. Nodes and weights are generated on demand by
// Newton iteration on the Legendre polynomials and cached per order.

#include <cstddef>
#include <functional>
#include <vector>

namespace spde {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;  // positive, sum to 2
};

// Rule of the given order (>= 1). Cached; thread-safe for concurrent reads
// after first use of a given order.
const GaussRule& gauss_legendre(std::size_t order);

// Integrate f over [a, b] with a single rule of the given order.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::size_t order = 32);

// Composite rule: split [a, b] into `panels` equal panels.
double integrate_composite(const std::function<double(double)>& f, double a,
                           double b, std::size_t panels,
                           std::size_t order = 32);

}  // namespace spde
