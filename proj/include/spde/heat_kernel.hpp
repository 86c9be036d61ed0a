#pragma once

// Heat kernels for nu * d^2/dx^2 on the unit interval with reflecting
// (zero-flux) boundaries, plus the periodic kernel on the unit circle and
// the pointwise variance of the unit-noise stochastic convolution.
//
// Two representations are available: a Gaussian image sum (fast for small
// nu*t) and the cosine eigenfunction series (fast for large nu*t). The
// automatic mode switches between them at nu*t = 0.05.

#include <cstddef>

namespace spde {

enum class KernelRepresentation { automatic, image_sum, spectral };

struct KernelParams {
  double nu = 0.5;
  double tol = 1e-12;
  KernelRepresentation representation = KernelRepresentation::automatic;
  std::size_t max_terms = 2'000'000;
};

// Periodic heat kernel on the unit circle evaluated at displacement x.
double kernel_periodic(double t, double x, const KernelParams& params = {});

// Reflecting-boundary kernel on [0, 1]. Symmetric in (x, y), integrates to 1
// in y, and tends to 1 as t grows.
double kernel_neumann(double t, double x, double y,
                      const KernelParams& params = {});

// Variance of int_0^t int_0^1 G(t-s, x, y) W(ds, dy) for space-time white
// noise W, i.e. the eigenmode series
//   t + sum_{k>=1} 2 cos^2(k pi x) (1 - exp(-2 nu k^2 pi^2 t)) / (2 nu k^2 pi^2),
// evaluated through its Bernoulli-polynomial acceleration so small t costs
// only the exponentially damped remainder.
double she_variance(double t, double x, const KernelParams& params = {});

}  // namespace spde
